use serde::Serialize;

use super::path::simulate_terminal;
use crate::core_num::special::gauss;
use crate::core_num::{block_reduce, RngStream};
use crate::error::{domain, Result};
use crate::model::{Coefficients, TimeGrid};

/// Smallest path count accepted by the Monte Carlo density estimate.
pub const MIN_DENSITY_PATHS: u64 = 10_000;

/// Kernel density estimate of `X^N_T` with pointwise standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McDensity {
    pub points: Vec<f64>,
    pub estimate: Vec<f64>,
    pub std_error: Vec<f64>,
    pub bandwidth: f64,
    pub n_paths: u64,
    pub seed: u64,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McMean {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
}

impl McMean {
    fn from_sums(s1: f64, s2: f64, n: u64) -> Self {
        let nf = n as f64;
        let mean = s1 / nf;
        let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0).max(1.0)).max(0.0);
        Self { mean, std_error: (var / nf).sqrt(), n_paths: n }
    }
}

/// Gaussian-kernel estimate on `eval_points`; path `i` uses stream
/// `(seed, i)`, so the result does not depend on the worker count.
pub fn mc_density_estimate(
    coeffs: &Coefficients,
    grid: &TimeGrid,
    x0: f64,
    n_paths: u64,
    bandwidth: f64,
    eval_points: &[f64],
    seed: u64,
) -> Result<McDensity> {
    if n_paths < MIN_DENSITY_PATHS {
        return domain(format!("density estimate needs at least {MIN_DENSITY_PATHS} paths, got {n_paths}"));
    }
    if !(bandwidth > 0.0) {
        return domain(format!("bandwidth must be positive, got {bandwidth}"));
    }
    let m = eval_points.len();
    let var = bandwidth * bandwidth;
    let blocks = block_reduce(n_paths, |range| -> Result<Vec<(f64, f64)>> {
        let mut acc = vec![(0.0, 0.0); m];
        for i in range {
            let x = simulate_terminal(coeffs, grid, &mut RngStream::new(seed, i), x0)?;
            for (slot, &y) in acc.iter_mut().zip(eval_points) {
                let k = gauss(var, y - x);
                slot.0 += k;
                slot.1 += k * k;
            }
        }
        Ok(acc)
    });
    let mut total = vec![(0.0, 0.0); m];
    for b in blocks {
        for (t, v) in total.iter_mut().zip(b?) {
            t.0 += v.0;
            t.1 += v.1;
        }
    }
    let (estimate, std_error) = total.iter().map(|&(s1, s2)| McMean::from_sums(s1, s2, n_paths)).map(|m| (m.mean, m.std_error)).unzip();
    Ok(McDensity { points: eval_points.to_vec(), estimate, std_error, bandwidth, n_paths, seed })
}

/// `E f(X^N_T)` for several functionals sharing the same paths.
pub fn mc_expectations<F>(coeffs: &Coefficients, grid: &TimeGrid, x0: f64, n_paths: u64, seed: u64, fs: &[F]) -> Result<Vec<McMean>>
where
    F: Fn(f64) -> f64 + Sync,
{
    if n_paths < 2 {
        return domain("Monte Carlo needs at least two paths");
    }
    let k = fs.len();
    let blocks = block_reduce(n_paths, |range| -> Result<Vec<(f64, f64)>> {
        let mut acc = vec![(0.0, 0.0); k];
        for i in range {
            let x = simulate_terminal(coeffs, grid, &mut RngStream::new(seed, i), x0)?;
            for (slot, f) in acc.iter_mut().zip(fs) {
                let v = f(x);
                slot.0 += v;
                slot.1 += v * v;
            }
        }
        Ok(acc)
    });
    let mut total = vec![(0.0, 0.0); k];
    for b in blocks {
        for (t, v) in total.iter_mut().zip(b?) {
            t.0 += v.0;
            t.1 += v.1;
        }
    }
    Ok(total.into_iter().map(|(s1, s2)| McMean::from_sums(s1, s2, n_paths)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;
    use crate::skew_kernels::{frozen_density, FrozenParam};

    #[test]
    fn gaussian_case_within_bands() {
        let c = catalog::model("constant").unwrap();
        let g = TimeGrid::new(1.0, 4).unwrap();
        let pts = [-1.0, 0.0, 0.3, 1.2];
        let bw = 0.1;
        let d = mc_density_estimate(&c, &g, 0.0, 100_000, bw, &pts, 5).unwrap();
        for (k, &y) in pts.iter().enumerate() {
            // smoothing the exact law with the kernel is exact for Gaussians
            let want = gauss(1.44 + bw * bw, y - 0.3);
            assert!((d.estimate[k] - want).abs() < 4.0 * d.std_error[k], "y={y}: {} vs {want}", d.estimate[k]);
        }
    }

    #[test]
    fn skew_bm_within_bands() {
        let c = catalog::model("skew-bm").unwrap();
        let g = TimeGrid::new(1.0, 3).unwrap();
        let fp = FrozenParam::new(1.0, 0.7).unwrap();
        let pts = [-1.0, -0.4, 0.5, 1.5];
        let d = mc_density_estimate(&c, &g, 0.0, 100_000, 0.05, &pts, 11).unwrap();
        for (k, &y) in pts.iter().enumerate() {
            let want = frozen_density(&fp, 1.0, 0.0, y).unwrap();
            // smoothing bias ≈ h²/2 p'' stays well below the noise here
            assert!((d.estimate[k] - want).abs() < 4.0 * d.std_error[k] + 2e-3, "y={y}: {} vs {want}", d.estimate[k]);
        }
    }

    #[test]
    fn guards_and_determinism() {
        let c = catalog::model("holder-bump").unwrap();
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert!(mc_density_estimate(&c, &g, 0.0, 100, 0.1, &[0.0], 1).is_err());
        let fs: [&(dyn Fn(f64) -> f64 + Sync); 2] = [&|x: f64| x.cos(), &|x: f64| if x >= 0.0 { 1.0 } else { 0.0 }];
        let a = mc_expectations(&c, &g, 0.0, 20_000, 3, &fs).unwrap();
        let b = mc_expectations(&c, &g, 0.0, 20_000, 3, &fs).unwrap();
        assert_eq!(a, b);
    }
}
