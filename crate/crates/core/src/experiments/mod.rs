//! Weak-rate, Gaussian-bound and local-time experiments built from the
//! scheme and the two parametrix series.

mod bounds;
mod local_time;
mod rate;
mod slope;
mod spec;

pub use bounds::{
    gaussian_time_derivative_bound, kernel_bound_certificates, lipschitz_experiment, two_sided_bound_experiment, BoundPair, KernelCertificates,
    LipschitzExperiment, KERNEL_GAPS, KERNEL_POINTS,
};
pub use local_time::{local_time_experiment, LocalTimeReport};
pub use rate::{weak_error_density, weak_error_functional, RateReport, FLAG_EXACT, FLAG_NOISE, FLAG_NON_MONOTONE, FLAG_RESOLUTION, FLAG_TAIL_LOOSE};
pub use slope::{slope_fit, SlopeFit};
pub use spec::{ExperimentSpec, ModelSpec, Reference, TestFunction};
