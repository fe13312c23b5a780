//! The exact-step Euler scheme: path simulation, transition densities by
//! composition, the discrete parametrix kernel and its series.

mod chain;
mod kernel;
mod mc;
mod path;
mod series;

pub use chain::chain_density;
pub use kernel::{discrete_convolve, discrete_kernel_HN, GridFn};
pub use mc::{mc_density_estimate, mc_expectations, McDensity, McMean, MIN_DENSITY_PATHS};
pub use path::{one_step_density, simulate_path, simulate_terminal, PathSample, StepLaw};
pub use series::{scheme_density_series, scheme_density_series_many, DiscreteSeriesConfig, SeriesKind, SeriesPoint};
