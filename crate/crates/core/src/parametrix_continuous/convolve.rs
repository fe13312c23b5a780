use crate::core_num::quad::panel_nodes;
use crate::core_num::{gl_rule, QuadConfig};
use crate::error::{domain, Error, Result};

/// Shape information for the nested quadrature of `f ⊗ g`.
///
/// Space windows come from Gaussian envelopes: `f(s, u, x, ·)` is taken to
/// spread like variance `f_var.0 + f_var.1·(u − s)` around `x`, and
/// `g(u, t, ·, y)` like `g_var.0 + g_var.1·(t − u)` around `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolveOpts {
    pub f_var: (f64, f64),
    pub g_var: (f64, f64),
    /// Extra half-width for drift, added to every window.
    pub shift: f64,
    /// Lower half uses `u = s + (mid − s)·v^k`.
    pub start_power: f64,
    /// `g` blows up like `(t − u)^{-end_exponent}`.
    pub end_exponent: f64,
    /// Points where the integrand jumps or has a cusp in space.
    pub breaks: Vec<f64>,
}

impl Default for ConvolveOpts {
    fn default() -> Self {
        Self { f_var: (0.0, 1.0), g_var: (0.0, 1.0), shift: 0.0, start_power: 2.0, end_exponent: 0.5, breaks: vec![0.0] }
    }
}

/// Time nodes `(u, t − u, weight)` for `∫_s^t`.
pub(crate) fn time_nodes(s: f64, t: f64, start_power: f64, end_exponent: f64, n: usize) -> Vec<(f64, f64, f64)> {
    let rule = gl_rule(n);
    let half = 0.5 * (t - s);
    let k = start_power;
    let q = 1.0 / (1.0 - end_exponent);
    let mut out = Vec::with_capacity(2 * rule.len());
    for &(xi, w) in rule.iter() {
        let v = 0.5 * (xi + 1.0);
        let vk1 = v.powf(k - 1.0);
        let off = half * vk1 * v;
        out.push((s + off, (t - s) - off, 0.5 * w * half * k * vk1));
    }
    for &(xi, w) in rule.iter() {
        let v = 0.5 * (xi + 1.0);
        let vq1 = v.powf(q - 1.0);
        let gap = half * vq1 * v;
        out.push((t - gap, gap, 0.5 * w * half * q * vq1));
    }
    out
}

/// Space window for the product of the two envelopes at time `u`.
pub(crate) fn space_window(opts: &ConvolveOpts, radius: f64, elapsed: f64, gap: f64, x: f64, y: f64) -> (f64, f64) {
    let vf = (opts.f_var.0 + opts.f_var.1 * elapsed).max(1e-300);
    let vg = (opts.g_var.0 + opts.g_var.1 * gap).max(1e-300);
    let centre = (x * vg + y * vf) / (vf + vg);
    let sd = (vf * vg / (vf + vg)).sqrt();
    let half = radius * sd + opts.shift;
    (centre - half, centre + half)
}

/// One fixed-resolution pass; `f` and `g` receive `(u, t − u, z)`.
pub(crate) fn convolve_fixed<F, G>(f: F, g: G, s: f64, t: f64, x: f64, y: f64, quad: &QuadConfig, opts: &ConvolveOpts) -> f64
where
    F: Fn(f64, f64, f64) -> f64,
    G: Fn(f64, f64, f64) -> f64,
{
    let rule = gl_rule(quad.space_nodes);
    let mut nodes = Vec::new();
    let mut total = 0.0;
    for (u, gap, wt) in time_nodes(s, t, opts.start_power, opts.end_exponent, quad.time_nodes) {
        let (lo, hi) = space_window(opts, quad.space_truncation_radius, u - s, gap, x, y);
        nodes.clear();
        panel_nodes(lo, hi, quad.space_panels, &opts.breaks, &rule, &mut nodes);
        let inner: f64 = nodes.iter().map(|&(z, wz)| wz * f(u, gap, z) * g(u, gap, z)).sum();
        total += wt * inner;
    }
    total
}

/// `(f ⊗ g)(s, t, x, y) = ∫_s^t du ∫ dz f(s, u, x, z) g(u, t, z, y)` with
/// the default unit-variance envelopes.
pub fn convolve<F, G>(f: F, g: G, s: f64, t: f64, x: f64, y: f64, quad: &QuadConfig) -> Result<f64>
where
    F: Fn(f64, f64, f64, f64) -> f64,
    G: Fn(f64, f64, f64, f64) -> f64,
{
    let opts = ConvolveOpts { end_exponent: quad.singular_exponent, ..ConvolveOpts::default() };
    convolve_with(f, g, s, t, x, y, quad, &opts)
}

/// [`convolve`] with explicit envelopes and singularity exponents. Runs
/// at the configured resolution and at doubled node counts, and reports an
/// accuracy error when the two disagree.
#[allow(clippy::too_many_arguments)]
pub fn convolve_with<F, G>(f: F, g: G, s: f64, t: f64, x: f64, y: f64, quad: &QuadConfig, opts: &ConvolveOpts) -> Result<f64>
where
    F: Fn(f64, f64, f64, f64) -> f64,
    G: Fn(f64, f64, f64, f64) -> f64,
{
    quad.validate()?;
    if !(s < t) {
        return domain(format!("convolution needs s < t (s={s}, t={t})"));
    }
    if !(0.0..1.0).contains(&opts.end_exponent) || !(opts.start_power >= 1.0) {
        return domain("convolution exponents out of range");
    }
    let ff = |u: f64, _: f64, z: f64| f(s, u, x, z);
    let gg = |u: f64, _: f64, z: f64| g(u, t, z, y);
    let coarse = convolve_fixed(ff, gg, s, t, x, y, quad, opts);
    let fine = convolve_fixed(ff, gg, s, t, x, y, &quad.doubled(), opts);
    if !fine.is_finite() {
        return Err(Error::Numeric("convolution produced a non-finite value".into()));
    }
    let diff = (fine - coarse).abs();
    if diff > quad.abs_tol + quad.rel_tol * fine.abs() {
        return Err(Error::Accuracy { context: "time-space convolution".into(), estimate: diff });
    }
    Ok(fine)
}
