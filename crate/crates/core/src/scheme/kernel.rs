use super::path::StepLaw;
use crate::core_num::{quad_space_split, QuadConfig};
use crate::error::{domain, Result};
use crate::model::{Coefficients, TimeGrid};
use crate::skew_kernels::density_raw;

/// Discrete kernel `H_N(t_j, t_{j'}, x, x')`: one scheme step against one
/// frozen step, propagated to `x'` by the frozen density.
#[allow(non_snake_case)]
pub fn discrete_kernel_HN(coeffs: &Coefficients, grid: &TimeGrid, j: usize, jp: usize, x: f64, xp: f64, quad: &QuadConfig) -> Result<f64> {
    if j >= jp {
        return domain(format!("discrete kernel needs j < j' (j={j}, j'={jp})"));
    }
    let h = grid.h();
    let m = jp - j;
    let a_p = coeffs.a(xp);
    let alpha = coeffs.alpha;
    let law = StepLaw::new(coeffs, h, x)?;
    if m == 1 {
        return Ok((law.density(xp) - density_raw(a_p, alpha, h, x, xp)) / h);
    }
    let rest = (m - 1) as f64 * h;
    let f = |z: f64| (law.density(z) - density_raw(a_p, alpha, h, x, z)) * density_raw(a_p, alpha, rest, z, xp);
    let scale = (coeffs.a(x).max(a_p) * h).sqrt();
    Ok(quad_space_split(f, x + 0.5 * coeffs.b(x) * h, scale, &[0.0], quad)? / h)
}

/// A function of `(t_i, t_k, z, w)` on the grid, with an optional Dirac
/// mass `δ_z(w)` at coincident times.
pub struct GridFn<F> {
    pub f: F,
    pub dirac_on_diagonal: bool,
}

impl<F: Fn(usize, usize, f64, f64) -> f64> GridFn<F> {
    pub fn new(f: F) -> Self {
        Self { f, dirac_on_diagonal: false }
    }

    /// Same function, but read as `δ` when both time indices agree.
    pub fn with_dirac(f: F) -> Self {
        Self { f, dirac_on_diagonal: true }
    }
}

/// `(f ⊗_N g)(t_j, t_{j'}, x, x') = Σ_{i=j}^{j'−1} h ∫ f(t_j, t_i, x, z) g(t_i, t_{j'}, z, x') dz`,
/// zero when `j ≥ j'`.
pub fn discrete_convolve<F, G>(f: &GridFn<F>, g: &GridFn<G>, grid: &TimeGrid, j: usize, jp: usize, x: f64, xp: f64, quad: &QuadConfig) -> Result<f64>
where
    F: Fn(usize, usize, f64, f64) -> f64,
    G: Fn(usize, usize, f64, f64) -> f64,
{
    if j >= jp {
        return Ok(0.0);
    }
    let h = grid.h();
    let mut sum = 0.0;
    for i in j..jp {
        if i == j && f.dirac_on_diagonal {
            sum += h * (g.f)(j, jp, x, xp);
            continue;
        }
        let frac = (i - j) as f64 / (jp - j) as f64;
        let centre = x + frac * (xp - x);
        // spread of a Brownian bridge pinned at both ends
        let scale = (frac * (jp - i) as f64 * h).sqrt();
        sum += h * quad_space_split(|z| (f.f)(j, i, x, z) * (g.f)(i, jp, z, xp), centre, scale, &[0.0], quad)?;
    }
    Ok(sum)
}
