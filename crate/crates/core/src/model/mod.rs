//! Model coefficients, the time grid and sample-based assumption checks.

pub mod catalog;
mod coefficients;
mod grid;
mod validate;

pub use coefficients::{Coefficients, Drift, Envelope, DriftSpec, ScalarFn, Sigma, SigmaSpec};
pub use grid::TimeGrid;
pub use validate::{validate_assumptions, Check, ValidationReport};

/// `φ_N(s)`.
pub fn phi_n(grid: &TimeGrid, s: f64) -> crate::Result<f64> {
    grid.phi_n(s)
}
