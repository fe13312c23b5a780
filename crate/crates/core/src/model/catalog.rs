//! Named reference models.

use super::{Coefficients, DriftSpec, SigmaSpec};
use crate::error::{Error, Result};

pub const NAMES: [&str; 5] = ["constant", "skew-bm", "affine-truncated", "holder-bump", "holder-bump-half"];

/// Centre of the bump in `a` for the Hölder-bump models; kept away from the
/// origin so the cusp and the skew interface do not interact.
pub const BUMP_CENTER: f64 = 0.5;

pub fn holder_bump(exponent: f64, amplitude: f64, drift_amplitude: f64, alpha: f64) -> Result<Coefficients> {
    Coefficients::from_specs(
        DriftSpec::Cosine { amplitude: drift_amplitude },
        SigmaSpec::HolderBump { base: 1.0, amplitude, center: BUMP_CENTER, exponent },
        alpha,
        exponent,
        1.0,
        2.0,
    )
}

pub fn model(name: &str) -> Result<Coefficients> {
    match name {
        "constant" => Coefficients::from_specs(DriftSpec::Constant { value: 0.3 }, SigmaSpec::Constant { value: 1.2 }, 0.5, 1.0, 1.0, 2.0),
        "skew-bm" => Coefficients::from_specs(DriftSpec::Zero, SigmaSpec::Constant { value: 1.0 }, 0.7, 1.0, 1.0, 2.0),
        "affine-truncated" => Coefficients::from_specs(DriftSpec::Zero, SigmaSpec::AffineTruncated, 0.7, 1.0, 2.0, 3.0),
        "holder-bump" => holder_bump(1.0, 0.4, 0.3, 0.7),
        "holder-bump-half" => holder_bump(0.5, 0.4, 0.3, 0.7),
        other => Err(Error::Config(format!("unknown model '{other}'; known models: {}", NAMES.join(", ")))),
    }
}
