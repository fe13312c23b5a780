//! Closed-form laws of the frozen skew process and of skew Brownian motion
//! with constant drift, an exact one-step sampler and the local-time mean.

mod drifted;
mod frozen;
mod local_time;

pub use drifted::{drifted_skew_density, sample_skew_step, DriftedSkewLaw, DriftedSkewParam};
pub use frozen::{frozen_density, frozen_density_dx, frozen_density_side, FrozenParam, Side};
pub use local_time::local_time_mean;

pub(crate) use frozen::{density_dx12, density_dx12_case, density_raw};
