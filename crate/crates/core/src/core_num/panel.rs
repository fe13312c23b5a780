use super::quad::gl_rule;

/// Largest panel order supported by [`PanelGrid::weights_at`].
pub const MAX_PANEL_NODES: usize = 48;

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    start: usize,
}

/// Composite Gauss–Legendre grid on `[lo, hi]` with panel edges at given
/// breakpoints, optionally graded geometrically towards cusp points.
/// Nodes double as interpolation points (barycentric, panel by panel).
#[derive(Debug, Clone)]
pub struct PanelGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    panels: Vec<Panel>,
    per_panel: usize,
    bary: Vec<f64>,
    std_nodes: Vec<f64>,
}

impl PanelGrid {
    /// `width` is the target panel width; `grade` points get `levels`
    /// extra edges at `c ± width·2^{-k}`.
    pub fn build(lo: f64, hi: f64, width: f64, breaks: &[f64], grade: &[f64], levels: usize, n: usize) -> Self {
        assert!(hi > lo && width > 0.0, "bad panel grid [{lo}, {hi}] width {width}");
        let n = n.clamp(2, MAX_PANEL_NODES);
        let count = ((hi - lo) / width).ceil().max(1.0) as usize;
        let mut edges: Vec<f64> = (0..=count).map(|k| lo + (hi - lo) * k as f64 / count as f64).collect();
        edges.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
        for &c in grade.iter().filter(|&&c| c > lo && c < hi) {
            edges.push(c);
            for k in 1..=levels {
                let d = width * 0.5f64.powi(k as i32);
                edges.extend([c - d, c + d].into_iter().filter(|&e| e > lo && e < hi));
            }
        }
        edges.sort_by(f64::total_cmp);
        let tiny = 1e-12 * (hi - lo);
        edges.dedup_by(|b, a| (*b - *a).abs() <= tiny);

        let rule = gl_rule(n);
        let std_nodes: Vec<f64> = rule.iter().map(|p| p.0).collect();
        let bary: Vec<f64> = rule
            .iter()
            .enumerate()
            .map(|(j, &(x, w))| if j % 2 == 0 { 1.0 } else { -1.0 } * ((1.0 - x * x) * w).sqrt())
            .collect();
        let mut nodes = Vec::with_capacity(n * (edges.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut panels = Vec::with_capacity(edges.len() - 1);
        for seg in edges.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            panels.push(Panel { lo: a, hi: b, start: nodes.len() });
            for &(x, w) in rule.iter() {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        Self { nodes, weights, panels, per_panel: n, bary, std_nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.panels[0].lo
    }

    pub fn hi(&self) -> f64 {
        self.panels[self.panels.len() - 1].hi
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// Index range of nodes lying in `[a, b]`.
    pub fn range(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let i0 = self.nodes.partition_point(|&z| z < a);
        let i1 = self.nodes.partition_point(|&z| z <= b);
        i0..i1.max(i0)
    }

    /// Interpolation weights at `z`: `f(z) ≈ Σ_j out[j]·f[start + j]`.
    /// Points on a shared edge belong to the panel on their right; `None`
    /// outside the grid.
    pub fn weights_at(&self, z: f64, out: &mut [f64; MAX_PANEL_NODES]) -> Option<usize> {
        if !(z >= self.lo() && z <= self.hi()) {
            return None;
        }
        let k = self.panels.partition_point(|p| p.lo <= z).saturating_sub(1);
        let p = self.panels[k];
        let x = (2.0 * z - (p.lo + p.hi)) / (p.hi - p.lo);
        let n = self.per_panel;
        let mut sum = 0.0;
        for j in 0..n {
            let d = x - self.std_nodes[j];
            if d == 0.0 {
                out[..n].iter_mut().for_each(|v| *v = 0.0);
                out[j] = 1.0;
                return Some(p.start);
            }
            let c = self.bary[j] / d;
            out[j] = c;
            sum += c;
        }
        out[..n].iter_mut().for_each(|v| *v /= sum);
        Some(p.start)
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.per_panel
    }

    /// Interpolant of nodal `values` at `z`, zero outside the grid.
    pub fn interp(&self, values: &[f64], z: f64) -> f64 {
        if !(z >= self.lo() && z <= self.hi()) {
            return 0.0;
        }
        let k = self.panels.partition_point(|p| p.lo <= z).saturating_sub(1);
        let p = self.panels[k];
        let x = (2.0 * z - (p.lo + p.hi)) / (p.hi - p.lo);
        let vals = &values[p.start..p.start + self.per_panel];
        let (mut num, mut den) = (0.0, 0.0);
        for (j, &v) in vals.iter().enumerate() {
            let d = x - self.std_nodes[j];
            if d == 0.0 {
                return v;
            }
            let c = self.bary[j] / d;
            num += c * v;
            den += c;
        }
        num / den
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}
