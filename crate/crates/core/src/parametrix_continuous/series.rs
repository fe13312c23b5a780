use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::convolve::{convolve_fixed, ConvolveOpts};
use super::kernel::h_value;
use super::tail::{tail_bound, TailConstants};
use crate::core_num::{PanelGrid, QuadConfig};
use crate::error::{domain, Error, Result};
use crate::model::{Coefficients, Envelope};
use crate::skew_kernels::density_raw;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeriesConfig {
    /// Highest order `R` kept.
    pub order: usize,
    pub quad: QuadConfig,
    pub tail_bound_enabled: bool,
    pub tail: TailConstants,
    /// Tail bounds above this raise the warning flag.
    pub tail_tolerance: f64,
    /// Number of times `t(m/M)²` at which iterated terms are tabulated.
    pub time_mesh: usize,
    /// Table panel width in standard deviations at the table time.
    pub panel_width: f64,
    pub grading_levels: usize,
    /// Also run a coarser build and report the difference.
    pub error_estimate: bool,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            order: 4,
            quad: QuadConfig::default(),
            tail_bound_enabled: true,
            tail: TailConstants::default(),
            tail_tolerance: 1e-3,
            time_mesh: 24,
            panel_width: 2.0,
            grading_levels: 8,
            error_estimate: false,
        }
    }
}

impl SeriesConfig {
    pub fn with_order(order: usize) -> Self {
        Self { order, ..Self::default() }
    }

    /// Cheaper layout used for the internal error estimate.
    pub fn coarser(&self) -> Self {
        let quad = QuadConfig {
            space_nodes: self.quad.space_nodes.saturating_sub(4).max(4),
            time_nodes: (2 * self.quad.time_nodes / 3).max(4),
            ..self.quad
        };
        Self { quad, time_mesh: (2 * self.time_mesh / 3).max(6), panel_width: 1.4 * self.panel_width, ..*self }
    }

    fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        if self.time_mesh < 6 {
            return domain(format!("time mesh needs at least 6 points, got {}", self.time_mesh));
        }
        if !(self.panel_width > 0.0) {
            return domain("panel width must be positive");
        }
        Ok(())
    }
}

/// Truncated series value at one target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesValue {
    pub y: f64,
    pub value: f64,
    /// `p̃ ⊗ H^{(r)}` for `r = 0..=R`.
    pub terms: Vec<f64>,
    pub tail_bound: Option<f64>,
    /// Tail bound above the configured tolerance.
    pub tail_warning: bool,
    pub error_estimate: Option<f64>,
}

/// `Σ_{r ≤ R} (p̃ ⊗ H^{(r)})(0, t, x, y)`.
pub fn density_series(coeffs: &Coefficients, cfg: &SeriesConfig, t: f64, x: f64, y: f64) -> Result<SeriesValue> {
    Ok(density_series_many(coeffs, cfg, t, x, &[y])?.remove(0))
}

/// [`density_series`] at many targets sharing one set of tables.
pub fn density_series_many(coeffs: &Coefficients, cfg: &SeriesConfig, t: f64, x: f64, ys: &[f64]) -> Result<Vec<SeriesValue>> {
    let main = ContinuousSeries::build(coeffs, cfg, t, x)?.evaluate(ys)?;
    if !cfg.error_estimate || coeffs.kernel_vanishes() {
        return Ok(main);
    }
    let coarse = ContinuousSeries::build(coeffs, &cfg.coarser(), t, x)?.evaluate(ys)?;
    Ok(main
        .into_iter()
        .zip(coarse)
        .map(|(mut v, c)| {
            v.error_estimate = Some((v.value - c.value).abs());
            v
        })
        .collect())
}

/// Iterated terms `f_r(u, ·) = (p̃ ⊗ H^{(r)})(0, u, x, ·)` tabulated on a
/// time mesh, for one start point and horizon.
pub struct ContinuousSeries<'a> {
    coeffs: &'a Coefficients,
    cfg: SeriesConfig,
    t: f64,
    x: f64,
    env: Envelope,
    opts: ConvolveOpts,
    mesh: Vec<f64>,
    grids: Vec<PanelGrid>,
    /// `tables[r − 1][l]`: `f_r` at the nodes of `grids[l]`
    tables: Vec<Vec<Vec<f64>>>,
    /// `scale[r − 1][l] = s_l^{(1 − rη)/2}`
    scale: Vec<Vec<f64>>,
}

impl<'a> ContinuousSeries<'a> {
    pub fn build(coeffs: &'a Coefficients, cfg: &SeriesConfig, t: f64, x: f64) -> Result<Self> {
        cfg.validate()?;
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("series time must be positive, got {t}"));
        }
        let radius = cfg.quad.space_truncation_radius;
        let guess = coeffs.envelope(x - 12.0, x + 12.0);
        let reach = 1.5 * radius * (guess.a_max * t).sqrt() + guess.b_sup * t;
        let env = coeffs.envelope(x - reach, x + reach);
        let (edges, grade) = coeffs.split_layout();
        let opts = ConvolveOpts {
            f_var: (0.0, 1.5 * env.a_max),
            g_var: (0.0, 1.5 * env.a_max),
            shift: env.b_sup * t,
            start_power: 2.0 / coeffs.eta,
            end_exponent: coeffs.singular_exponent(),
            breaks: edges.clone(),
        };
        let m = cfg.time_mesh;
        let mesh: Vec<f64> = (1..=m).map(|l| t * (l as f64 / m as f64).powi(2)).collect();
        let levels = if grade.is_empty() { 0 } else { cfg.grading_levels };
        let grids: Vec<PanelGrid> = mesh
            .iter()
            .map(|&s| {
                let reach = radius * (env.a_max * s).sqrt() + env.b_sup * s;
                let width = cfg.panel_width * (env.a_min * s).sqrt();
                PanelGrid::build(x - reach, x + reach, width, &edges, &grade, levels, cfg.quad.space_nodes)
            })
            .collect();
        let mut series = Self { coeffs, cfg: *cfg, t, x, env, opts, mesh, grids, tables: Vec::new(), scale: Vec::new() };
        if coeffs.kernel_vanishes() {
            return Ok(series);
        }
        for r in 1..cfg.order {
            let table: Vec<Vec<f64>> = (0..m)
                .map(|l| {
                    let s = series.mesh[l];
                    series.grids[l].nodes.par_iter().map(|&y| series.term(r, s, y)).collect::<Vec<f64>>()
                })
                .collect();
            if table.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("series order {r} produced a non-finite table entry")));
            }
            series.tables.push(table);
            let e = 0.5 * (r as f64 * coeffs.eta - 1.0);
            series.scale.push(series.mesh.iter().map(|s| s.powf(-e)).collect());
        }
        Ok(series)
    }

    pub fn horizon(&self) -> f64 {
        self.t
    }

    pub fn start(&self) -> f64 {
        self.x
    }

    /// Sampled coefficient bounds used to size the windows.
    pub fn envelope(&self) -> Envelope {
        self.env
    }

    /// Series value at every target; targets must avoid the origin.
    pub fn evaluate(&self, ys: &[f64]) -> Result<Vec<SeriesValue>> {
        if let Some(y) = ys.iter().find(|&&y| y == 0.0 || !y.is_finite()) {
            return domain(format!("series target must be finite and nonzero, got {y}"));
        }
        let order = self.cfg.order;
        ys.par_iter()
            .map(|&y| {
                let mut terms = vec![0.0; order + 1];
                terms[0] = self.f(0, self.t, y);
                if !self.coeffs.kernel_vanishes() {
                    self.all_terms(self.t, y, &mut terms[1..]);
                }
                if terms.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numeric(format!("series at y={y} produced a non-finite term")));
                }
                let value = terms.iter().sum();
                let tail = if self.coeffs.kernel_vanishes() {
                    Some(0.0)
                } else if self.cfg.tail_bound_enabled {
                    Some(tail_bound(self.coeffs.eta, &self.cfg.tail, order + 1, self.t, self.x, y))
                } else {
                    None
                };
                let tail_warning = tail.is_some_and(|b| b > self.cfg.tail_tolerance);
                let error_estimate = self.coeffs.kernel_vanishes().then_some(0.0);
                Ok(SeriesValue { y, value, terms, tail_bound: tail, tail_warning, error_estimate })
            })
            .collect()
    }

    /// `f_r(s, y)` from `f_{r−1}` at mesh or target time `s`.
    fn term(&self, r: usize, s: f64, y: f64) -> f64 {
        let a_y = self.coeffs.a(y);
        convolve_fixed(
            |u, _, z| self.f(r - 1, u, z),
            |_, gap, z| h_value(self.coeffs, gap, z, y, a_y),
            0.0,
            s,
            self.x,
            y,
            &self.cfg.quad,
            &self.opts,
        )
    }

    fn all_terms(&self, s: f64, y: f64, out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.term(k + 1, s, y);
        }
    }

    /// `f_r(u, z)`: closed form for `r = 0`, otherwise interpolated from the
    /// tables in the similarity variable `(z − x)/√u`.
    fn f(&self, r: usize, u: f64, z: f64) -> f64 {
        if r == 0 {
            return density_raw(self.coeffs.a(z), self.coeffs.alpha, u, self.x, z);
        }
        let table = &self.tables[r - 1];
        let m = self.mesh.len();
        let e = 0.5 * (r as f64 * self.coeffs.eta - 1.0);
        let w = (u / self.t).sqrt() * m as f64;
        let x = self.x;
        let scale = &self.scale[r - 1];
        let inv = 1.0 / u.sqrt();
        let scaled = |l: usize| (x + self.mesh[l].sqrt() * inv * (z - x), scale[l]);
        if w < 1.0 {
            let (zl, k) = scaled(0);
            return u.powf(e) * k * self.grids[0].interp(&table[0], zl);
        }
        // stencil of four mesh points, indexed 1..=M in w
        let l0 = ((w.floor() as usize).saturating_sub(1)).clamp(1, m - 3);
        let nodes = [l0, l0 + 1, l0 + 2, l0 + 3];
        let mut lw = [1.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    lw[i] *= (w - nodes[j] as f64) / (nodes[i] as f64 - nodes[j] as f64);
                }
            }
        }
        let crosses = nodes.iter().any(|&l| (scaled(l - 1).0 >= 0.0) != (z >= 0.0));
        if crosses {
            // the jump at the origin would be smeared; interpolate at fixed z
            return (0..4).map(|i| lw[i] * self.grids[nodes[i] - 1].interp(&table[nodes[i] - 1], z)).sum();
        }
        let ue = u.powf(e);
        (0..4)
            .map(|i| {
                let l = nodes[i] - 1;
                let (zl, k) = scaled(l);
                lw[i] * k * self.grids[l].interp(&table[l], zl)
            })
            .sum::<f64>()
            * ue
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_num::special::gauss;
    use crate::model::{catalog, DriftSpec, SigmaSpec};
    use crate::skew_kernels::{frozen_density, FrozenParam};

    fn light() -> SeriesConfig {
        SeriesConfig { time_mesh: 12, quad: QuadConfig { time_nodes: 12, space_nodes: 10, ..QuadConfig::default() }, ..SeriesConfig::default() }
    }

    #[test]
    fn vanishing_kernel_is_frozen_density() {
        let c = catalog::model("skew-bm").unwrap();
        let fp = FrozenParam::new(1.0, c.alpha).unwrap();
        for r in [0, 3, 6] {
            let v = density_series(&c, &SeriesConfig::with_order(r), 0.8, 0.3, -0.5).unwrap();
            assert_eq!(v.value, frozen_density(&fp, 0.8, 0.3, -0.5).unwrap());
            assert!(v.terms[1..].iter().all(|&t| t == 0.0));
        }
    }

    #[test]
    fn drifted_gaussian_at_order_six() {
        let c = catalog::model("constant").unwrap();
        let ys = [-1.2, -0.3, 0.2, 0.5, 1.4, 2.5];
        let vals = density_series_many(&c, &SeriesConfig::with_order(6), 1.0, 0.0, &ys).unwrap();
        for v in vals {
            let want = gauss(1.44, v.y - 0.3);
            assert!((v.value - want).abs() < 1e-4, "y={}: {} vs {want}", v.y, v.value);
        }
    }

    #[test]
    fn terms_decay_geometrically_for_constant_drift() {
        let c = catalog::model("constant").unwrap();
        let ys = [-0.8, 0.3, 1.1];
        let vals = density_series_many(&c, &SeriesConfig::with_order(6), 1.0, 0.0, &ys).unwrap();
        for v in vals {
            let want = gauss(1.44, v.y - 0.3);
            // geometric envelope from the frozen density's error; single
            // ratios can stall where an odd-order term vanishes
            let first = (v.terms[0] - want).abs();
            let mut acc = v.terms[0];
            for r in 1..v.terms.len() {
                acc += v.terms[r];
                let err = (acc - want).abs();
                assert!(err <= 2.0 * first * 0.5f64.powi(r as i32) + 1e-6, "y={} r={r}: {err} vs {first}", v.y);
            }
        }
    }

    #[test]
    fn holder_model_normalizes() {
        let c = catalog::holder_bump(0.5, 0.4, 0.0, 0.7).unwrap();
        let cfg = SeriesConfig { order: 3, ..light() };
        let series = ContinuousSeries::build(&c, &cfg, 1.0, 0.0).unwrap();
        let grid = crate::core_num::quad::gl_rule(12);
        let mut pts = Vec::new();
        crate::core_num::quad::panel_nodes(-10.0, 10.0, 24, &[0.0, catalog::BUMP_CENTER], &grid, &mut pts);
        let ys: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let vals = series.evaluate(&ys).unwrap();
        let mass: f64 = vals.iter().zip(&pts).map(|(v, p)| v.value * p.1).sum();
        assert!((mass - 1.0).abs() < 5e-3, "{mass}");
    }

    #[test]
    fn symmetric_model_is_symmetric() {
        let c = Coefficients::from_specs(
            DriftSpec::Zero,
            SigmaSpec::HolderBump { base: 1.0, amplitude: 0.4, center: 0.0, exponent: 1.0 },
            0.5,
            1.0,
            1.0,
            2.0,
        )
        .unwrap();
        let cfg = light();
        let a = density_series_many(&c, &cfg, 0.7, 0.3, &[0.5, -0.4, 1.2]).unwrap();
        let b = density_series_many(&c, &cfg, 0.7, -0.3, &[-0.5, 0.4, -1.2]).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p.value - q.value).abs() < 1e-6 * p.value, "{} vs {}", p.value, q.value);
        }
    }

    #[test]
    fn refinement_stays_inside_estimate() {
        let c = catalog::model("holder-bump").unwrap();
        let cfg = SeriesConfig { order: 3, error_estimate: true, ..light() };
        let base = density_series_many(&c, &cfg, 0.5, 0.0, &[0.3, -0.4]).unwrap();
        let fine_cfg = SeriesConfig { quad: cfg.quad.doubled(), error_estimate: false, ..cfg };
        let fine = density_series_many(&c, &fine_cfg, 0.5, 0.0, &[0.3, -0.4]).unwrap();
        for (b, f) in base.iter().zip(&fine) {
            let est = b.error_estimate.unwrap();
            assert!((b.value - f.value).abs() <= est, "{} vs {} (est {est})", b.value, f.value);
        }
    }

    #[test]
    fn rejects_origin_target() {
        let c = catalog::model("holder-bump").unwrap();
        assert!(density_series(&c, &light(), 1.0, 0.0, 0.0).is_err());
        assert!(density_series(&c, &light(), 0.0, 0.0, 0.5).is_err());
    }
}
