use serde::{Deserialize, Serialize};

use super::series::{ContinuousSeries, SeriesConfig};
use crate::core_num::special::gauss;
use crate::error::{domain, Result};
use crate::model::Coefficients;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    /// `p ≤ C g_{ct}`
    Upper,
    /// `p ≥ C^{-1} g_{t/c}`
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl LatticePoint {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        Self { t, x, y }
    }
}

/// Fitted Gaussian bound over a finite lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub side: BoundSide,
    #[serde(rename = "fitted_C")]
    pub fitted_big_c: f64,
    pub fitted_c: f64,
    /// Largest relative excess over the fitted bound; `≤ 0` when it holds.
    pub max_violation: f64,
    pub lattice: String,
    pub points: usize,
    /// Points left out of a lower fit because the value was not positive.
    pub excluded: usize,
}

impl BoundCertificate {
    pub fn holds(&self) -> bool {
        self.points > 0 && self.max_violation <= 0.0
    }
}

/// Scanned dilations `c ∈ {1.05, 1.10, …, 8}`.
pub fn c_grid() -> Vec<f64> {
    (21..=160).map(|k| k as f64 * 0.05).collect()
}

/// Evaluate on the lattice and fit with [`gaussian_bound_fit_values`].
pub fn gaussian_bound_fit<F>(evaluator: F, lattice: &[LatticePoint], side: BoundSide) -> Result<BoundCertificate>
where
    F: Fn(f64, f64, f64) -> Result<f64>,
{
    let values = lattice.iter().map(|p| evaluator(p.t, p.x, p.y)).collect::<Result<Vec<_>>>()?;
    gaussian_bound_fit_values(lattice, &values, side)
}

/// Smallest `C` over the scanned `c` such that the bound holds at every
/// lattice point; ties go to the smaller `c`.
pub fn gaussian_bound_fit_values(lattice: &[LatticePoint], values: &[f64], side: BoundSide) -> Result<BoundCertificate> {
    if lattice.is_empty() || lattice.len() != values.len() {
        return domain("bound fit needs a non-empty lattice with one value per point");
    }
    if lattice.iter().any(|p| !(p.t > 0.0)) {
        return domain("bound fit needs positive times");
    }
    let used: Vec<(LatticePoint, f64)> = lattice
        .iter()
        .zip(values)
        .filter(|(_, &v)| v.is_finite() && (side == BoundSide::Upper || v > 0.0))
        .map(|(p, &v)| (*p, v))
        .collect();
    let excluded = lattice.len() - used.len();
    let lattice_desc = describe(lattice);
    if used.is_empty() {
        return Ok(BoundCertificate {
            side,
            fitted_big_c: f64::INFINITY,
            fitted_c: f64::NAN,
            max_violation: f64::INFINITY,
            lattice: lattice_desc,
            points: 0,
            excluded,
        });
    }
    let need = |c: f64| -> f64 {
        used.iter()
            .map(|(p, v)| match side {
                BoundSide::Upper => v / gauss(c * p.t, p.y - p.x),
                BoundSide::Lower => gauss(p.t / c, p.y - p.x) / v,
            })
            .fold(0.0, f64::max)
    };
    let (mut best_c, mut best) = (f64::NAN, f64::INFINITY);
    for c in c_grid() {
        let k = need(c);
        if k < best {
            best = k;
            best_c = c;
        }
    }
    let big_c = best * (1.0 + 1e-12);
    let max_violation = used
        .iter()
        .map(|(p, v)| match side {
            BoundSide::Upper => {
                let b = big_c * gauss(best_c * p.t, p.y - p.x);
                (v - b) / b
            }
            BoundSide::Lower => {
                let b = gauss(p.t / best_c, p.y - p.x) / big_c;
                (b - v) / b
            }
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundCertificate {
        side,
        fitted_big_c: big_c,
        fitted_c: best_c,
        max_violation,
        lattice: lattice_desc,
        points: used.len(),
        excluded,
    })
}

fn describe(lattice: &[LatticePoint]) -> String {
    let span = |f: fn(&LatticePoint) -> f64| {
        let lo = lattice.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = lattice.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        format!("[{lo}, {hi}]")
    };
    format!("{} points, t in {}, x in {}, y in {}", lattice.len(), span(|p| p.t), span(|p| p.x), span(|p| p.y))
}

/// Outcome of [`time_lipschitz_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub t: f64,
    pub s: f64,
    /// `max |p(t+s) − p(t)|·t / (s·g_{ĉt}(y−x))`
    pub ratio: f64,
    pub c_hat: f64,
    pub worst: (f64, f64),
}

/// Empirical time-Lipschitz ratio of the series density at `t`.
pub fn time_lipschitz_check(coeffs: &Coefficients, cfg: &SeriesConfig, t: f64, s: f64, lattice: &[(f64, f64)]) -> Result<LipschitzReport> {
    if !(s > 0.0 && s <= t) {
        return domain(format!("Lipschitz check needs 0 < s <= t (s={s}, t={t})"));
    }
    if lattice.is_empty() {
        return domain("Lipschitz check needs a non-empty lattice");
    }
    let mut xs: Vec<f64> = lattice.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut now = vec![0.0; lattice.len()];
    let mut later = vec![0.0; lattice.len()];
    for &x in &xs {
        let idx: Vec<usize> = (0..lattice.len()).filter(|&i| lattice[i].0 == x).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| lattice[i].1).collect();
        let a = ContinuousSeries::build(coeffs, cfg, t, x)?.evaluate(&ys)?;
        let b = ContinuousSeries::build(coeffs, cfg, t + s, x)?.evaluate(&ys)?;
        for (k, &i) in idx.iter().enumerate() {
            now[i] = a[k].value;
            later[i] = b[k].value;
        }
    }
    let points: Vec<LatticePoint> = lattice.iter().map(|&(x, y)| LatticePoint::new(t, x, y)).collect();
    let c_hat = gaussian_bound_fit_values(&points, &now, BoundSide::Upper)?.fitted_c;
    let mut ratio = 0.0;
    let mut worst = lattice[0];
    for (i, &(x, y)) in lattice.iter().enumerate() {
        let r = (later[i] - now[i]).abs() * t / (s * gauss(c_hat * t, y - x));
        if r > ratio {
            ratio = r;
            worst = (x, y);
        }
    }
    Ok(LipschitzReport { t, s, ratio, c_hat, worst })
}
