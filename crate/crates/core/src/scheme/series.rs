use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::StepLaw;
use crate::core_num::{PanelGrid, QuadConfig};
use crate::error::{domain, Error, Result};
use crate::model::{Coefficients, TimeGrid};
use crate::parametrix_continuous::kernel::{h_from, h_value};
use crate::parametrix_continuous::{tail_bound, TailConstants};
use crate::skew_kernels::density_raw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    /// Discrete kernel `H_N`; the series is finite and equals `p_N`.
    FullDiscrete,
    /// Continuous kernel `H` summed on the grid; truncated.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscreteSeriesConfig {
    pub quad: QuadConfig,
    pub kind: SeriesKind,
    /// Highest order kept. Defaults to every order (`j' − j`) for the full
    /// kind and to 4 for the hybrid one.
    pub max_order: Option<usize>,
    /// Space panel width in one-step standard deviations.
    pub panel_width: f64,
    /// Geometric refinement levels towards cusps of `a`.
    pub grading_levels: usize,
    pub tail: TailConstants,
    /// Also run a refined grid and report the difference.
    pub error_estimate: bool,
}

impl Default for DiscreteSeriesConfig {
    fn default() -> Self {
        Self {
            quad: QuadConfig::default(),
            kind: SeriesKind::FullDiscrete,
            max_order: None,
            panel_width: 2.0,
            grading_levels: 8,
            tail: TailConstants::default(),
            error_estimate: false,
        }
    }
}

impl DiscreteSeriesConfig {
    pub fn hybrid(max_order: usize) -> Self {
        Self { kind: SeriesKind::Hybrid, max_order: Some(max_order), ..Self::default() }
    }

    fn order_for(&self, steps: usize) -> usize {
        match self.kind {
            SeriesKind::FullDiscrete => self.max_order.map_or(steps, |r| r.min(steps)),
            SeriesKind::Hybrid => self.max_order.unwrap_or(4),
        }
    }

    fn refined(&self) -> Self {
        let quad = QuadConfig { space_nodes: self.quad.space_nodes + 4, ..self.quad };
        Self { quad, panel_width: 0.7 * self.panel_width, grading_levels: self.grading_levels + 4, ..*self }
    }
}

/// Series value at one target with its per-order terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub y: f64,
    pub value: f64,
    pub terms: Vec<f64>,
    /// Bound on the dropped orders (zero when nothing was dropped).
    pub tail_bound: f64,
    /// Difference to a refined-grid run, when requested.
    pub error_estimate: Option<f64>,
}

/// `Σ_r (p̃ ⊗_N H^{(r)})(t_j, t_{j'}, x, x')` for the chosen kernel.
pub fn scheme_density_series(
    coeffs: &Coefficients,
    grid: &TimeGrid,
    cfg: &DiscreteSeriesConfig,
    j: usize,
    jp: usize,
    x: f64,
    xp: f64,
) -> Result<SeriesPoint> {
    Ok(scheme_density_series_many(coeffs, grid, cfg, j, jp, x, &[xp])?.remove(0))
}

/// [`scheme_density_series`] at many targets sharing one set of tables.
pub fn scheme_density_series_many(
    coeffs: &Coefficients,
    grid: &TimeGrid,
    cfg: &DiscreteSeriesConfig,
    j: usize,
    jp: usize,
    x: f64,
    targets: &[f64],
) -> Result<Vec<SeriesPoint>> {
    cfg.quad.validate()?;
    if j >= jp || jp > grid.steps() {
        return domain(format!("series needs j < j' <= N (j={j}, j'={jp}, N={})", grid.steps()));
    }
    if !(cfg.panel_width > 0.0) {
        return domain("panel width must be positive");
    }
    let steps = jp - j;
    let order = cfg.order_for(steps);
    let span = steps as f64 * grid.h();
    let dropped = match cfg.kind {
        SeriesKind::FullDiscrete => order < steps,
        SeriesKind::Hybrid => true,
    };
    let tail = |y: f64| if dropped { tail_bound(coeffs.eta, &cfg.tail, order + 1, span, x, y) } else { 0.0 };

    if coeffs.kernel_vanishes() {
        // both kernels are identically zero: the series is p̃ itself
        return Ok(targets
            .iter()
            .map(|&y| {
                let mut terms = vec![0.0; order + 1];
                terms[0] = density_raw(coeffs.a(y), coeffs.alpha, span, x, y);
                SeriesPoint { y, value: terms[0], terms, tail_bound: 0.0, error_estimate: Some(0.0) }
            })
            .collect());
    }

    let main = DiscreteDp::build(coeffs, grid.h(), steps, x, order, cfg)?.evaluate(targets)?;
    let refined = if cfg.error_estimate {
        let fine_cfg = cfg.refined();
        Some(DiscreteDp::build(coeffs, grid.h(), steps, x, order, &fine_cfg)?.evaluate(targets)?)
    } else {
        None
    };
    Ok(main
        .into_iter()
        .enumerate()
        .map(|(k, terms)| {
            let y = targets[k];
            let value: f64 = terms.iter().sum();
            let error_estimate = refined.as_ref().map(|r| (r[k].iter().sum::<f64>() - value).abs());
            SeriesPoint { y, value, terms, tail_bound: tail(y), error_estimate }
        })
        .collect())
}

/// Banded slice of a kernel column or a one-step row.
#[derive(Debug, Clone, Default)]
struct Band {
    start: usize,
    vals: Vec<f64>,
}

/// Tables `f_r(t_k, ·)` on a panel grid, filled by dynamic programming
/// over the target time `k`.
struct DiscreteDp<'a> {
    coeffs: &'a Coefficients,
    kind: SeriesKind,
    h: f64,
    n: usize,
    x: f64,
    order: usize,
    grid: PanelGrid,
    a_nodes: Vec<f64>,
    /// `rad·√(a_max h)`: reach of one step
    reach1: f64,
    a_max: f64,
    radius: f64,
    shift: f64,
    laws: Vec<StepLaw>,
    rows: Vec<Band>,
    x_row: Band,
    x_law: Option<StepLaw>,
}

impl<'a> DiscreteDp<'a> {
    fn build(coeffs: &'a Coefficients, h: f64, n: usize, x: f64, order: usize, cfg: &DiscreteSeriesConfig) -> Result<Self> {
        let span = n as f64 * h;
        let radius = cfg.quad.space_truncation_radius;
        let guess = coeffs.envelope(x - 12.0, x + 12.0);
        let reach = radius * (guess.a_max * span).sqrt() + guess.b_sup * span;
        let env = coeffs.envelope(x - reach, x + reach);
        let reach = radius * (env.a_max * span).sqrt() + env.b_sup * span;
        let (edges, grade) = coeffs.split_layout();
        let width = cfg.panel_width * (env.a_min * h).sqrt();
        let levels = if grade.is_empty() { 0 } else { cfg.grading_levels };
        let grid = PanelGrid::build(x - reach, x + reach, width, &edges, &grade, levels, cfg.quad.space_nodes);
        let a_nodes = grid.nodes.iter().map(|&z| coeffs.a(z)).collect();
        let mut dp = Self {
            coeffs,
            kind: cfg.kind,
            h,
            n,
            x,
            order,
            grid,
            a_nodes,
            reach1: radius * (env.a_max * h).sqrt(),
            a_max: env.a_max,
            radius,
            shift: env.b_sup * h,
            laws: Vec::new(),
            rows: Vec::new(),
            x_row: Band::default(),
            x_law: None,
        };
        if cfg.kind == SeriesKind::FullDiscrete {
            dp.laws = dp.grid.nodes.iter().map(|&z| StepLaw::new(coeffs, h, z)).collect::<Result<_>>()?;
            dp.rows = (0..dp.grid.len()).map(|i| dp.step_row(&dp.laws[i], dp.grid.nodes[i])).collect();
            let law = StepLaw::new(coeffs, h, x)?;
            dp.x_row = dp.step_row(&law, x);
            dp.x_law = Some(law);
        }
        Ok(dp)
    }

    /// `p_N(h, z, v)·w_v` over the nodes `v` a step can reach.
    fn step_row(&self, law: &StepLaw, z: f64) -> Band {
        let centre = z + self.coeffs.b(z) * self.h;
        let r = self.grid.range(centre - self.reach1, centre + self.reach1);
        let vals = r.clone().map(|v| law.density(self.grid.nodes[v]) * self.grid.weights[v]).collect();
        Band { start: r.start, vals }
    }

    fn reach(&self, m: usize) -> f64 {
        self.radius * (self.a_max * m as f64 * self.h).sqrt() + self.shift
    }

    /// `h·K_m(z, w)·w_z` over the relevant `z`, and `h·K_m(x, w)`.
    fn column(&self, m: usize, w: f64) -> (Band, f64) {
        let h = self.h;
        let alpha = self.coeffs.alpha;
        let a_w = self.coeffs.a(w);
        let reach = self.reach(m);
        let zr = self.grid.range(w - reach, w + reach);
        let nodes = &self.grid.nodes;
        let weights = &self.grid.weights;
        match self.kind {
            SeriesKind::Hybrid => {
                let tau = m as f64 * h;
                let vals = zr.clone().map(|z| h * weights[z] * h_value(self.coeffs, tau, nodes[z], w, a_w)).collect();
                let dirac = h * h_from(self.coeffs, tau, self.x, w, a_w);
                (Band { start: zr.start, vals }, dirac)
            }
            SeriesKind::FullDiscrete if m == 1 => {
                let vals = zr
                    .clone()
                    .map(|z| weights[z] * (self.laws[z].density(w) - density_raw(a_w, alpha, h, nodes[z], w)))
                    .collect();
                let law = self.x_law.as_ref().expect("full kind has the start law");
                let dirac = law.density(w) - density_raw(a_w, alpha, h, self.x, w);
                (Band { start: zr.start, vals }, dirac)
            }
            SeriesKind::FullDiscrete => {
                let rest = (m - 1) as f64 * h;
                let tau = m as f64 * h;
                let (lo, hi) = if zr.is_empty() { (w, w) } else { (nodes[zr.start], nodes[zr.end - 1]) };
                let vr = self.grid.range(lo - self.reach1 - self.shift, hi + self.reach1 + self.shift);
                let q: Vec<f64> = vr.clone().map(|v| density_raw(a_w, alpha, rest, nodes[v], w)).collect();
                let dot = |row: &Band| -> f64 {
                    let s = row.start.max(vr.start);
                    let e = (row.start + row.vals.len()).min(vr.end);
                    (s..e).map(|v| row.vals[v - row.start] * q[v - vr.start]).sum()
                };
                let vals = zr
                    .clone()
                    .map(|z| weights[z] * (dot(&self.rows[z]) - density_raw(a_w, alpha, tau, nodes[z], w)))
                    .collect();
                // the start row need not lie inside the cached window
                let row = &self.x_row;
                let from_x: f64 = row
                    .vals
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| p * density_raw(a_w, alpha, rest, nodes[row.start + k], w))
                    .sum();
                let dirac = from_x - density_raw(a_w, alpha, tau, self.x, w);
                (Band { start: zr.start, vals }, dirac)
            }
        }
    }

    /// Per-order terms at the final time for every target.
    fn evaluate(&self, targets: &[f64]) -> Result<Vec<Vec<f64>>> {
        let nn = self.grid.len();
        let ro = self.order + 1;
        let alpha = self.coeffs.alpha;
        let h = self.h;

        // kernel columns towards grid nodes, for every lag a grid time needs
        let bank: Vec<Vec<(Band, f64)>> = (1..self.n)
            .map(|m| (0..nn).into_par_iter().map(|w| self.column(m, self.grid.nodes[w])).collect())
            .collect();

        let mut tables: Vec<Vec<f64>> = vec![Vec::new(); self.n];
        let mut active = vec![0usize; self.n];
        let accumulate = |vals: &mut [f64], i: usize, col: &Band, tables: &[Vec<f64>], active: &[usize]| {
            let rmax = self.order.min(active[i] + 1);
            let fi = &tables[i];
            for (k, &c) in col.vals.iter().enumerate() {
                let base = (col.start + k) * ro;
                for r in 1..=rmax {
                    vals[r] += c * fi[base + r - 1];
                }
            }
        };

        for k in 1..self.n {
            let tk = k as f64 * h;
            let rows: Vec<Vec<f64>> = (0..nn)
                .into_par_iter()
                .map(|w| {
                    let mut vals = vec![0.0; ro];
                    vals[0] = density_raw(self.a_nodes[w], alpha, tk, self.x, self.grid.nodes[w]);
                    if self.order >= 1 {
                        vals[1] += bank[k - 1][w].1;
                    }
                    for i in 1..k {
                        accumulate(&mut vals, i, &bank[k - i - 1][w].0, &tables, &active);
                    }
                    vals
                })
                .collect();
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            let scale = (0..nn).map(|w| flat[w * ro].abs()).fold(0.0, f64::max);
            active[k] = (0..ro)
                .rev()
                .find(|&r| (0..nn).any(|w| flat[w * ro + r].abs() > 1e-18 * scale))
                .unwrap_or(0);
            if flat.iter().any(|v| !v.is_finite() || v.abs() > 1e150) {
                return Err(Error::Refused(format!("series term at grid time {k} left the overflow guard")));
            }
            tables[k] = flat;
        }

        let tn = self.n as f64 * h;
        targets
            .par_iter()
            .map(|&y| {
                let mut vals = vec![0.0; ro];
                vals[0] = density_raw(self.coeffs.a(y), alpha, tn, self.x, y);
                if self.order >= 1 {
                    vals[1] += self.column(self.n, y).1;
                }
                for i in 1..self.n {
                    let (col, _) = self.column(self.n - i, y);
                    accumulate(&mut vals, i, &col, &tables, &active);
                }
                if vals.iter().any(|v| !v.is_finite() || v.abs() > 1e150) {
                    return Err(Error::Refused(format!("series term at target {y} left the overflow guard")));
                }
                Ok(vals)
            })
            .collect()
    }
}
