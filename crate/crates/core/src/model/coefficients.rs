use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Drift shapes available by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DriftSpec {
    Zero,
    Constant { value: f64 },
    /// `amplitude · cos(x)`
    Cosine { amplitude: f64 },
    /// `amplitude · tanh(rate · x)`
    Tanh { amplitude: f64, rate: f64 },
    /// `amplitude · sign(x)`, with `sign(0) = 1`
    Sign { amplitude: f64 },
}

/// Diffusion shapes available by name. Each is stated through `a = σ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SigmaSpec {
    Constant { value: f64 },
    /// `a(x) = 1 + min(1, |x|)`
    AffineTruncated,
    /// `a(x) = base + amplitude · max(0, 1 − |x − center|^exponent)`
    HolderBump { base: f64, amplitude: f64, center: f64, exponent: f64 },
    /// `a(x) = base + amplitude · sin(x)`
    Sine { base: f64, amplitude: f64 },
    /// `a(x) = left` for `x < at`, `right` otherwise
    Step { left: f64, right: f64, at: f64 },
}

#[derive(Clone)]
pub enum Drift {
    Spec(DriftSpec),
    Custom { f: ScalarFn, sup: f64, breaks: Vec<f64> },
}

#[derive(Clone)]
pub enum Sigma {
    Spec(SigmaSpec),
    Custom { f: ScalarFn, breaks: Vec<f64> },
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drift::Spec(s) => s.fmt(f),
            Drift::Custom { sup, .. } => write!(f, "Custom(sup={sup})"),
        }
    }
}

impl fmt::Debug for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sigma::Spec(s) => s.fmt(f),
            Sigma::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl Drift {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Drift::Spec(DriftSpec::Zero) => 0.0,
            Drift::Spec(DriftSpec::Constant { value }) => *value,
            Drift::Spec(DriftSpec::Cosine { amplitude }) => amplitude * x.cos(),
            Drift::Spec(DriftSpec::Tanh { amplitude, rate }) => amplitude * (rate * x).tanh(),
            Drift::Spec(DriftSpec::Sign { amplitude }) => {
                if x >= 0.0 {
                    *amplitude
                } else {
                    -amplitude
                }
            }
            Drift::Custom { f, .. } => f(x),
        }
    }

    /// Upper bound for `sup |b|`.
    pub fn sup(&self) -> f64 {
        match self {
            Drift::Spec(DriftSpec::Zero) => 0.0,
            Drift::Spec(DriftSpec::Constant { value }) => value.abs(),
            Drift::Spec(DriftSpec::Cosine { amplitude })
            | Drift::Spec(DriftSpec::Tanh { amplitude, .. })
            | Drift::Spec(DriftSpec::Sign { amplitude }) => amplitude.abs(),
            Drift::Custom { sup, .. } => *sup,
        }
    }

    fn breaks(&self) -> Vec<f64> {
        match self {
            Drift::Spec(DriftSpec::Sign { .. }) => vec![0.0],
            Drift::Custom { breaks, .. } => breaks.clone(),
            _ => Vec::new(),
        }
    }

    fn constant(&self) -> Option<f64> {
        match self {
            Drift::Spec(DriftSpec::Zero) => Some(0.0),
            Drift::Spec(DriftSpec::Constant { value }) => Some(*value),
            Drift::Spec(DriftSpec::Cosine { amplitude })
            | Drift::Spec(DriftSpec::Tanh { amplitude, .. })
            | Drift::Spec(DriftSpec::Sign { amplitude })
                if *amplitude == 0.0 =>
            {
                Some(0.0)
            }
            _ => None,
        }
    }
}

impl Sigma {
    /// Diffusion variance `a(x) = σ(x)²`.
    #[inline]
    pub fn variance(&self, x: f64) -> f64 {
        match self {
            Sigma::Spec(SigmaSpec::Constant { value }) => value * value,
            Sigma::Spec(SigmaSpec::AffineTruncated) => 1.0 + x.abs().min(1.0),
            Sigma::Spec(SigmaSpec::HolderBump { base, amplitude, center, exponent }) => {
                base + amplitude * (1.0 - (x - center).abs().powf(*exponent)).max(0.0)
            }
            Sigma::Spec(SigmaSpec::Sine { base, amplitude }) => base + amplitude * x.sin(),
            Sigma::Spec(SigmaSpec::Step { left, right, at }) => {
                if x < *at {
                    *left
                } else {
                    *right
                }
            }
            Sigma::Custom { f, .. } => {
                let s = f(x);
                s * s
            }
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Sigma::Spec(SigmaSpec::Constant { value }) => *value,
            Sigma::Custom { f, .. } => f(x),
            _ => self.variance(x).sqrt(),
        }
    }

    /// Points where `a` is only Hölder, not Lipschitz.
    fn cusps(&self) -> Vec<f64> {
        match self {
            Sigma::Spec(SigmaSpec::HolderBump { center, exponent, .. }) if *exponent < 1.0 => vec![*center],
            Sigma::Custom { breaks, .. } => breaks.clone(),
            _ => Vec::new(),
        }
    }

    fn breaks(&self) -> Vec<f64> {
        match self {
            Sigma::Spec(SigmaSpec::AffineTruncated) => vec![-1.0, 0.0, 1.0],
            Sigma::Spec(SigmaSpec::HolderBump { center, .. }) => vec![center - 1.0, *center, center + 1.0],
            Sigma::Spec(SigmaSpec::Step { at, .. }) => vec![*at],
            Sigma::Custom { breaks, .. } => breaks.clone(),
            _ => Vec::new(),
        }
    }

    fn constant(&self) -> Option<f64> {
        match self {
            Sigma::Spec(SigmaSpec::Constant { value }) => Some(*value),
            Sigma::Spec(SigmaSpec::HolderBump { base, amplitude, .. }) if *amplitude == 0.0 => Some(base.sqrt()),
            Sigma::Spec(SigmaSpec::Sine { base, amplitude }) if *amplitude == 0.0 => Some(base.sqrt()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub a_min: f64,
    pub a_max: f64,
    pub b_sup: f64,
}

/// Model coefficients `(b, σ, α)` together with the declared regularity
/// constants `η`, `L` and ellipticity `λ`.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub drift: Drift,
    pub sigma: Sigma,
    pub alpha: f64,
    pub eta: f64,
    pub l_bound: f64,
    pub lambda_ell: f64,
    breaks: Vec<f64>,
    cusps: Vec<f64>,
}

impl Coefficients {
    pub fn new(drift: Drift, sigma: Sigma, alpha: f64, eta: f64, l_bound: f64, lambda_ell: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("alpha must lie in (0, 1), got {alpha}"));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return domain(format!("eta must lie in (0, 1], got {eta}"));
        }
        if !(l_bound > 0.0) || !l_bound.is_finite() {
            return domain(format!("L must be positive, got {l_bound}"));
        }
        if !(lambda_ell > 1.0) || !lambda_ell.is_finite() {
            return domain(format!("lambda must exceed 1, got {lambda_ell}"));
        }
        let mut breaks = drift.breaks();
        breaks.extend(sigma.breaks());
        breaks.retain(|b| b.is_finite() && *b != 0.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let cusps = if eta < 1.0 { sigma.cusps() } else { Vec::new() };
        Ok(Self { drift, sigma, alpha, eta, l_bound, lambda_ell, breaks, cusps })
    }

    pub fn from_specs(drift: DriftSpec, sigma: SigmaSpec, alpha: f64, eta: f64, l_bound: f64, lambda_ell: f64) -> Result<Self> {
        Self::new(Drift::Spec(drift), Sigma::Spec(sigma), alpha, eta, l_bound, lambda_ell)
    }

    /// Constant `b` and `σ`.
    pub fn constant(b: f64, sigma: f64, alpha: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return domain(format!("sigma must be positive, got {sigma}"));
        }
        let a = sigma * sigma;
        let lambda = (a.max(1.0 / a) * 2.0).max(2.0);
        Self::from_specs(DriftSpec::Constant { value: b }, SigmaSpec::Constant { value: sigma }, alpha, 1.0, b.abs() + 1.0, lambda)
    }

    #[inline]
    pub fn b(&self, x: f64) -> f64 {
        self.drift.eval(x)
    }

    #[inline]
    pub fn sigma(&self, x: f64) -> f64 {
        self.sigma.eval(x)
    }

    #[inline]
    pub fn a(&self, x: f64) -> f64 {
        self.sigma.variance(x)
    }

    /// Nonzero points where `b` or `a` fail to be smooth. The origin is
    /// always treated as a split point separately.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn constant_drift(&self) -> Option<f64> {
        self.drift.constant()
    }

    pub fn constant_sigma(&self) -> Option<f64> {
        self.sigma.constant()
    }

    /// Scheme and diffusion share their law: either no local time and
    /// constant coefficients, or driftless with constant σ.
    pub fn scheme_is_exact(&self) -> bool {
        match (self.constant_drift(), self.constant_sigma()) {
            (Some(b), Some(_)) => b == 0.0 || self.alpha == 0.5,
            _ => false,
        }
    }

    /// Parametrix kernel vanishes identically.
    pub fn kernel_vanishes(&self) -> bool {
        self.constant_drift() == Some(0.0) && self.constant_sigma().is_some()
    }

    /// Panel edges for space grids (the origin plus every breakpoint) and
    /// the points worth grading towards: cusps of `a` when `η < 1`.
    pub fn split_layout(&self) -> (Vec<f64>, Vec<f64>) {
        let mut edges = vec![0.0];
        edges.extend_from_slice(&self.breaks);
        edges.sort_by(f64::total_cmp);
        (edges, self.cusps.clone())
    }

    /// Sampled bounds of `a` and `|b|` on `[lo, hi]`, used to size
    /// quadrature windows (the declared `λ`, `L` are often loose).
    pub fn envelope(&self, lo: f64, hi: f64) -> Envelope {
        let mut e = Envelope { a_min: f64::INFINITY, a_max: 0.0, b_sup: 0.0 };
        let n = 2000;
        let extra = self.breaks.iter().flat_map(|&c| [c, c - 1e-9, c + 1e-9]);
        for x in (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).chain(extra).chain([0.0, 1e-12, -1e-12]) {
            let a = self.a(x);
            e.a_min = e.a_min.min(a);
            e.a_max = e.a_max.max(a);
            e.b_sup = e.b_sup.max(self.b(x).abs());
        }
        e
    }

    /// Exponent of the time singularity of the parametrix kernel.
    pub fn singular_exponent(&self) -> f64 {
        1.0 - 0.5 * self.eta
    }
}
