use rayon::prelude::*;
use serde::Serialize;

use super::spec::ExperimentSpec;
use crate::core_num::special::ln_gauss;
use crate::core_num::QuadConfig;
use crate::error::{domain, Result};
use crate::model::{Coefficients, TimeGrid};
use crate::parametrix_continuous::{
    gaussian_bound_fit_values, kernel_H, time_lipschitz_check, BoundCertificate, BoundSide, LatticePoint, LipschitzReport, SeriesConfig,
};
use crate::scheme::{discrete_kernel_HN, one_step_density, scheme_density_series_many, DiscreteSeriesConfig, SeriesKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPair {
    pub upper: BoundCertificate,
    pub lower: BoundCertificate,
    pub n: usize,
}

impl BoundPair {
    pub fn holds(&self) -> bool {
        self.upper.holds() && self.lower.holds()
    }
}

/// Start points of the bound lattice: `x0` and `x0 ± ½`, `x0 ± 1`.
fn start_points(x0: f64) -> Vec<f64> {
    vec![x0 - 1.0, x0 - 0.5, x0, x0 + 0.5, x0 + 1.0]
}

/// Gaussian upper and lower bounds for `p_N` on elapsed times
/// `{h, T/4, T/2, T}` and `|y − x| ≤ 4√T`, with `N` the largest step count
/// of the spec. One step uses the closed form, longer spans the full
/// discrete series.
pub fn two_sided_bound_experiment(spec: &ExperimentSpec) -> Result<BoundPair> {
    spec.validate()?;
    let coeffs = spec.model.build()?;
    let n = *spec.n_list.last().expect("validated non-empty");
    if n % 4 != 0 {
        return domain(format!("bound lattice needs N divisible by 4, got {n}"));
    }
    let grid = TimeGrid::new(spec.t_end, n)?;
    let reach = 4.0 * spec.t_end.sqrt();
    let offsets: Vec<f64> = (-8..=8).map(|k| reach * k as f64 / 8.0).collect();
    let cfg = DiscreteSeriesConfig { kind: SeriesKind::FullDiscrete, max_order: None, ..spec.discrete };
    let mut points = Vec::new();
    let mut values = Vec::new();
    for &x in &start_points(spec.x0) {
        let ys: Vec<f64> = offsets.iter().map(|d| x + d).filter(|&y| y != 0.0).collect();
        for span in [1, n / 4, n / 2, n] {
            let t = grid.time(span);
            let vals: Vec<f64> = if span == 1 {
                ys.iter().map(|&y| one_step_density(&coeffs, t, x, y)).collect::<Result<_>>()?
            } else {
                scheme_density_series_many(&coeffs, &grid, &cfg, 0, span, x, &ys)?.into_iter().map(|p| p.value).collect()
            };
            points.extend(ys.iter().map(|&y| LatticePoint::new(t, x, y)));
            values.extend(vals);
        }
    }
    Ok(BoundPair {
        upper: gaussian_bound_fit_values(&points, &values, BoundSide::Upper)?,
        lower: gaussian_bound_fit_values(&points, &values, BoundSide::Lower)?,
        n,
    })
}

/// Smoothing bounds `|K(s, t, x, y)| ≤ C (t − s)^{η/2 − 1} g_{c(t−s)}(y − x)`
/// for the continuous kernel and its grid analogue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCertificates {
    pub h: BoundCertificate,
    pub h_n: BoundCertificate,
}

pub const KERNEL_GAPS: [f64; 3] = [0.05, 0.1, 0.5];
pub const KERNEL_POINTS: [f64; 4] = [-2.0, -0.5, 0.5, 2.0];

/// Fits both kernel bounds on gaps [`KERNEL_GAPS`] and `x, y` in
/// [`KERNEL_POINTS`]. The grid kernel lives on `T = 1`, `N = 20`.
pub fn kernel_bound_certificates(coeffs: &Coefficients, quad: &QuadConfig) -> Result<KernelCertificates> {
    let grid = TimeGrid::new(1.0, 20)?;
    let power = 1.0 - 0.5 * coeffs.eta;
    let mut pts = Vec::new();
    for &gap in &KERNEL_GAPS {
        for &x in &KERNEL_POINTS {
            for &y in &KERNEL_POINTS {
                pts.push(LatticePoint::new(gap, x, y));
            }
        }
    }
    let h_vals: Vec<f64> = pts.iter().map(|p| Ok(kernel_H(coeffs, 0.0, p.t, p.x, p.y)?.abs() * p.t.powf(power))).collect::<Result<_>>()?;
    let hn_vals: Vec<f64> = pts
        .par_iter()
        .map(|p| {
            let jp = (p.t / grid.h()).round() as usize;
            Ok(discrete_kernel_HN(coeffs, &grid, 0, jp, p.x, p.y, quad)?.abs() * p.t.powf(power))
        })
        .collect::<Result<_>>()?;
    Ok(KernelCertificates {
        h: gaussian_bound_fit_values(&pts, &h_vals, BoundSide::Upper)?,
        h_n: gaussian_bound_fit_values(&pts, &hn_vals, BoundSide::Upper)?,
    })
}

/// Time-Lipschitz ratios over several `s` together with the bound that
/// follows from differentiating the exact density in time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzExperiment {
    pub reports: Vec<LipschitzReport>,
    /// Same `s` order as `reports`.
    pub analytic_bounds: Vec<f64>,
    /// Largest over smallest ratio across `s`.
    pub drift: f64,
}

impl LipschitzExperiment {
    pub fn within_bounds(&self) -> bool {
        self.reports.iter().zip(&self.analytic_bounds).all(|(r, b)| r.ratio.is_finite() && r.ratio <= *b)
    }
}

/// `sup_{τ ∈ [t, t+s]} t·|∂_τ p(τ, x, y)| / g_{ct}(y − x)` where `p` is the
/// exact density of a constant-coefficient model, either `α = ½` (drifted
/// Gaussian) or `b = 0` (skew Brownian motion). The sup in `τ` is sampled.
pub fn gaussian_time_derivative_bound(coeffs: &Coefficients, t: f64, s: f64, c: f64, lattice: &[(f64, f64)]) -> Result<f64> {
    let (Some(b), Some(sigma)) = (coeffs.constant_drift(), coeffs.constant_sigma()) else {
        return domain("time-derivative bound needs constant coefficients");
    };
    if b != 0.0 && coeffs.alpha != 0.5 {
        return domain("time-derivative bound needs alpha = 1/2 or zero drift");
    }
    let a = sigma * sigma;
    let skew = (2.0 * coeffs.alpha - 1.0).abs();
    // |∂_τ g_{aτ}(d − bτ)| through its logarithmic derivative
    let dg = |tau: f64, d: f64| {
        let e = d - b * tau;
        let dlog = -0.5 / tau + b * e / (a * tau) + e * e / (2.0 * a * tau * tau);
        (ln_gauss(a * tau, e)).exp() * dlog.abs()
    };
    let mut worst = 0.0f64;
    for &(x, y) in lattice {
        let norm = ln_gauss(c * t, y - x);
        for k in 0..=512 {
            let tau = t + s * k as f64 / 512.0;
            let v = dg(tau, y - x) + skew * dg(tau, x.abs() + y.abs());
            worst = worst.max(t * v / norm.exp());
        }
    }
    Ok(worst)
}

/// Runs [`time_lipschitz_check`] for `s ∈ {t/8, t/4, t/2}`.
pub fn lipschitz_experiment(coeffs: &Coefficients, cfg: &SeriesConfig, t: f64, lattice: &[(f64, f64)]) -> Result<LipschitzExperiment> {
    let mut reports = Vec::new();
    let mut analytic_bounds = Vec::new();
    for s in [t / 8.0, t / 4.0, t / 2.0] {
        let r = time_lipschitz_check(coeffs, cfg, t, s, lattice)?;
        analytic_bounds.push(gaussian_time_derivative_bound(coeffs, t, s, r.c_hat, lattice)?);
        reports.push(r);
    }
    let hi = reports.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let lo = reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    Ok(LipschitzExperiment { reports, analytic_bounds, drift: hi / lo })
}
