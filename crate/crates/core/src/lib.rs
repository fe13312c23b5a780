//! Skew diffusions driven by local time at zero: an exact-step Euler scheme,
//! parametrix expansions of the true and scheme transition densities, and
//! experiments measuring weak error rates and Gaussian two-sided bounds.
//!
//! The model is
//!
//! ```text
//! X_t = x + ∫ b(X_s) ds + ∫ σ(X_s) dW_s + (2α − 1) L⁰_t(X)
//! ```
//!
//! with bounded measurable drift, Hölder continuous and uniformly elliptic
//! `a = σ²`, and skewness `α ∈ (0, 1)`.

pub mod cli;
pub mod core_num;
pub mod experiments;
pub mod model;
pub mod parametrix_continuous;
pub mod scheme;
pub mod skew_kernels;

mod error;

pub use error::{Error, Result};
