//! Parametrix expansion of the transition density of the diffusion itself.

mod bounds;
mod convolve;
pub(crate) mod kernel;
mod series;
mod tail;

pub use bounds::{c_grid, gaussian_bound_fit, gaussian_bound_fit_values, time_lipschitz_check, BoundCertificate, BoundSide, LatticePoint, LipschitzReport};
pub use convolve::{convolve, convolve_with, ConvolveOpts};
pub use kernel::kernel_H;
pub use series::{density_series, density_series_many, ContinuousSeries, SeriesConfig, SeriesValue};
pub use tail::{tail_bound, TailConstants};
