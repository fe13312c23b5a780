use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{domain, Error, Result};

/// Gauss–Legendre node/weight pairs on `[-1, 1]`, ascending.
pub type Rule = Arc<Vec<(f64, f64)>>;

/// Cached Gauss–Legendre rule with `n ≥ 2` nodes.
pub fn gl_rule(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let n = n.max(2);
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n)
        .or_insert_with(|| {
            let gl = GaussLegendre::new(n).expect("degree >= 2");
            let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(pairs)
        })
        .clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    /// Half-width of the space window in standard deviations.
    pub space_truncation_radius: f64,
    /// Gauss–Legendre nodes per space panel.
    pub space_nodes: usize,
    /// Panels per space window before splitting at breakpoints.
    pub space_panels: usize,
    /// Gauss–Legendre nodes per time half-interval.
    pub time_nodes: usize,
    /// Exponent `p` of the `(t−u)^{-p}` endpoint singularity.
    pub singular_exponent: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            space_truncation_radius: 8.0,
            space_nodes: 12,
            space_panels: 4,
            time_nodes: 16,
            singular_exponent: 0.5,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.space_truncation_radius > 0.0) {
            return domain("space_truncation_radius must be positive");
        }
        if self.space_nodes < 2 || self.time_nodes < 2 || self.space_panels < 1 {
            return domain("quadrature needs at least 2 nodes and 1 panel");
        }
        if !(0.0..1.0).contains(&self.singular_exponent) {
            return domain(format!("singular exponent must lie in [0, 1), got {}", self.singular_exponent));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return domain("tolerances must be positive");
        }
        Ok(())
    }

    /// Same layout with every node count doubled.
    pub fn doubled(&self) -> Self {
        Self { space_nodes: 2 * self.space_nodes, time_nodes: 2 * self.time_nodes, ..*self }
    }
}

/// Gauss–Legendre nodes on `[lo, hi]` cut into `panels` equal pieces and
/// further split at every breakpoint strictly inside. Appends to `out`.
pub fn panel_nodes(lo: f64, hi: f64, panels: usize, breaks: &[f64], rule: &[(f64, f64)], out: &mut Vec<(f64, f64)>) {
    if !(hi > lo) {
        return;
    }
    let mut edges: Vec<f64> = (0..=panels).map(|k| lo + (hi - lo) * k as f64 / panels as f64).collect();
    edges.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    edges.sort_by(f64::total_cmp);
    let tiny = 1e-13 * (hi - lo);
    edges.dedup_by(|b, a| (*b - *a).abs() <= tiny);
    for seg in edges.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        out.extend(rule.iter().map(|&(x, w)| (mid + half * x, half * w)));
    }
}

fn converged(coarse: f64, fine: f64, cfg: &QuadConfig) -> bool {
    (fine - coarse).abs() <= cfg.abs_tol + cfg.rel_tol * fine.abs()
}

/// `∫_ℝ f` over `center ± radius·scale`.
pub fn quad_space<F: Fn(f64) -> f64>(f: F, center: f64, scale: f64, cfg: &QuadConfig) -> Result<f64> {
    quad_space_split(f, center, scale, &[], cfg)
}

/// [`quad_space`] honouring jump points of the integrand.
pub fn quad_space_split<F: Fn(f64) -> f64>(
    f: F,
    center: f64,
    scale: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !(scale > 0.0) {
        return domain(format!("space scale must be positive, got {scale}"));
    }
    let half = cfg.space_truncation_radius * scale;
    let eval = |n: usize| {
        let mut nodes = Vec::new();
        panel_nodes(center - half, center + half, cfg.space_panels, breaks, &gl_rule(n), &mut nodes);
        nodes.iter().map(|&(z, w)| w * f(z)).sum::<f64>()
    };
    let coarse = eval(cfg.space_nodes);
    let fine = eval(2 * cfg.space_nodes);
    if !fine.is_finite() {
        return Err(Error::Numeric("space quadrature produced a non-finite value".into()));
    }
    if !converged(coarse, fine, cfg) {
        return Err(Error::Accuracy { context: "space quadrature".into(), estimate: (fine - coarse).abs() });
    }
    Ok(fine)
}

/// Nodes for `∫_s^t` with an integrable `(t−u)^{-p}` singularity at `t`,
/// through `u = t − (t−s) v^{1/(1−p)}`.
pub fn singular_time_nodes(s: f64, t: f64, p: f64, rule: &[(f64, f64)], out: &mut Vec<(f64, f64)>) {
    let k = 1.0 / (1.0 - p);
    let len = t - s;
    for &(x, w) in rule {
        let v = 0.5 * (x + 1.0);
        let vk1 = v.powf(k - 1.0);
        out.push((t - len * vk1 * v, 0.5 * w * len * k * vk1));
    }
}

/// Nodes for `∫_s^t` with a square-root type start at `s`
/// (`u = s + (t−s) w²`).
pub fn sqrt_start_nodes(s: f64, t: f64, rule: &[(f64, f64)], out: &mut Vec<(f64, f64)>) {
    let len = t - s;
    for &(x, w) in rule {
        let v = 0.5 * (x + 1.0);
        out.push((s + len * v * v, w * len * v));
    }
}

/// `∫_s^t f(u) du` where `f(u)·(t−u)^{exponent}` is bounded.
pub fn quad_time_singular<F: Fn(f64) -> f64>(f: F, s: f64, t: f64, exponent: f64, cfg: &QuadConfig) -> Result<f64> {
    quad_time_singular_gap(|u, _| f(u), s, t, exponent, cfg)
}

/// Like [`quad_time_singular`], with the integrand also receiving the gap
/// `t − u` computed without cancellation.
pub fn quad_time_singular_gap<F: Fn(f64, f64) -> f64>(f: F, s: f64, t: f64, exponent: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(0.0..1.0).contains(&exponent) {
        return domain(format!("singular exponent must lie in [0, 1), got {exponent}"));
    }
    cfg.validate()?;
    if !(s < t) {
        return domain(format!("time integral needs s < t (s={s}, t={t})"));
    }
    let k = 1.0 / (1.0 - exponent);
    let len = t - s;
    let eval = |n: usize| {
        gl_rule(n)
            .iter()
            .map(|&(x, w)| {
                let v = 0.5 * (x + 1.0);
                let vk1 = v.powf(k - 1.0);
                let gap = len * vk1 * v;
                0.5 * w * len * k * vk1 * f(t - gap, gap)
            })
            .sum::<f64>()
    };
    let coarse = eval(cfg.time_nodes);
    let fine = eval(2 * cfg.time_nodes);
    if !fine.is_finite() {
        return Err(Error::Numeric("time quadrature produced a non-finite value".into()));
    }
    if !converged(coarse, fine, cfg) {
        return Err(Error::Accuracy { context: "singular time quadrature".into(), estimate: (fine - coarse).abs() });
    }
    Ok(fine)
}
