use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{catalog, Coefficients, DriftSpec, SigmaSpec};
use crate::parametrix_continuous::SeriesConfig;
use crate::scheme::DiscreteSeriesConfig;

/// A catalog model by name, or coefficients written out in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Catalog {
        name: String,
    },
    Inline {
        drift: DriftSpec,
        sigma: SigmaSpec,
        alpha: f64,
        eta: f64,
        #[serde(rename = "L")]
        l_bound: f64,
        lambda: f64,
    },
}

impl ModelSpec {
    pub fn catalog(name: &str) -> Self {
        ModelSpec::Catalog { name: name.to_string() }
    }

    pub fn build(&self) -> Result<Coefficients> {
        match self {
            ModelSpec::Catalog { name } => catalog::model(name),
            ModelSpec::Inline { drift, sigma, alpha, eta, l_bound, lambda } => {
                Coefficients::from_specs(drift.clone(), sigma.clone(), *alpha, *eta, *l_bound, *lambda)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModelSpec::Catalog { name } => name.clone(),
            ModelSpec::Inline { .. } => "inline".to_string(),
        }
    }
}

/// Test functions for the weak error in expectations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    Cos,
    /// `1{y ≥ k}`
    Indicator { k: f64 },
    /// 0 below `lo`, 1 above `hi`, linear in between
    Ramp { lo: f64, hi: f64 },
}

impl TestFunction {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            TestFunction::Cos => y.cos(),
            TestFunction::Indicator { k } => {
                if y >= k {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Ramp { lo, hi } => ((y - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Points where `f` is not smooth.
    pub fn breaks(&self) -> Vec<f64> {
        match *self {
            TestFunction::Cos => Vec::new(),
            TestFunction::Indicator { k } => vec![k],
            TestFunction::Ramp { lo, hi } => vec![lo, hi],
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TestFunction::Indicator { k } if !k.is_finite() => domain("indicator level must be finite"),
            TestFunction::Ramp { lo, hi } if !(lo < hi) => domain(format!("ramp needs lo < hi (lo={lo}, hi={hi})")),
            _ => Ok(()),
        }
    }
}

/// Where the reference value of `E f(X_T)` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reference {
    /// Exact law when the scheme is exact, otherwise the series.
    Auto,
    /// `∫ f p(0, T, x0, ·)` with `p` from the continuous series.
    Series,
    /// Monte Carlo at `n` and `n/2` steps, extrapolated with the
    /// theoretical exponent `η/2`.
    Richardson { n: usize },
}

/// Everything a rate or bound experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    pub t_end: f64,
    pub n_list: Vec<usize>,
    pub x0: f64,
    pub test_function: TestFunction,
    /// Target points `y` for density experiments; empty means a default
    /// lattice around `x0`.
    pub lattice: Vec<f64>,
    pub n_paths: u64,
    pub seed: u64,
    pub reference: Reference,
    pub series: SeriesConfig,
    pub discrete: DiscreteSeriesConfig,
    /// Orders kept in the hybrid series.
    pub hybrid_order: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            model: ModelSpec::catalog("holder-bump"),
            t_end: 1.0,
            n_list: vec![4, 8, 16, 32],
            x0: 0.0,
            test_function: TestFunction::Cos,
            lattice: Vec::new(),
            n_paths: 100_000,
            seed: 1,
            reference: Reference::Auto,
            series: SeriesConfig { order: 6, ..SeriesConfig::default() },
            discrete: DiscreteSeriesConfig::default(),
            hybrid_order: 4,
        }
    }
}

impl ExperimentSpec {
    /// Checks shared by every experiment.
    pub fn validate(&self) -> Result<()> {
        self.model.build()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return domain(format!("T must be positive, got {}", self.t_end));
        }
        if !self.x0.is_finite() {
            return domain("x0 must be finite");
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return domain("N list must hold positive step counts");
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return domain(format!("N list must be strictly increasing, got {:?}", self.n_list));
        }
        if self.lattice.iter().any(|y| !y.is_finite()) {
            return domain("lattice points must be finite");
        }
        self.test_function.validate()
    }

    /// Rate experiments also need enough points for a slope.
    pub fn validate_rate(&self) -> Result<()> {
        self.validate()?;
        if self.n_list.len() < 3 {
            return Err(Error::Config(format!("slope fitting needs at least 3 values of N, got {}", self.n_list.len())));
        }
        Ok(())
    }

    /// The given lattice without the origin, or 33 points spanning
    /// `x0 ± 4√T`.
    pub fn density_lattice(&self) -> Vec<f64> {
        let pts: Vec<f64> = if self.lattice.is_empty() {
            let r = 4.0 * self.t_end.sqrt();
            (0..=32).map(|k| self.x0 - r + r * k as f64 / 16.0).collect()
        } else {
            self.lattice.clone()
        };
        pts.into_iter().filter(|&y| y != 0.0).collect()
    }
}
