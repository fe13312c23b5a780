use serde::Serialize;

use super::Coefficients;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub observed: f64,
    /// Declared limit it is compared against.
    pub limit: f64,
    /// Probe point(s) attaining `observed`.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub max_holder_quotient: f64,
    pub holder_witness: Option<(f64, f64)>,
    /// The quotient kept growing when the worst pair was squeezed together,
    /// which points to a discontinuity (or a smaller true exponent).
    pub holder_unbounded: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Sample-based check of boundedness, Hölder regularity and ellipticity on
/// the given probe points. `pair_budget` caps the number of Hölder pairs.
pub fn validate_assumptions(coeffs: &Coefficients, probe_points: &[f64], pair_budget: usize) -> ValidationReport {
    let mut pts: Vec<f64> = probe_points.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut checks = Vec::new();

    let (mut sup_b, mut b_at) = (0.0f64, f64::NAN);
    let (mut a_min, mut a_min_at) = (f64::INFINITY, f64::NAN);
    let (mut a_max, mut a_max_at) = (f64::NEG_INFINITY, f64::NAN);
    let (mut s_min, mut s_min_at) = (f64::INFINITY, f64::NAN);
    for &x in &pts {
        let b = coeffs.b(x).abs();
        if !(b <= sup_b) {
            sup_b = b;
            b_at = x;
        }
        let a = coeffs.a(x);
        if !(a >= a_min) {
            a_min = a;
            a_min_at = x;
        }
        if !(a <= a_max) {
            a_max = a;
            a_max_at = x;
        }
        let s = coeffs.sigma(x);
        if !(s >= s_min) {
            s_min = s;
            s_min_at = x;
        }
    }
    let lam = coeffs.lambda_ell;
    checks.push(Check {
        name: "drift bounded by L".into(),
        passed: sup_b < coeffs.l_bound,
        observed: sup_b,
        limit: coeffs.l_bound,
        witness: vec![b_at],
    });
    checks.push(Check {
        name: "sigma positive".into(),
        passed: s_min > 0.0,
        observed: s_min,
        limit: 0.0,
        witness: vec![s_min_at],
    });
    checks.push(Check {
        name: "ellipticity lower".into(),
        passed: a_min >= 1.0 / lam,
        observed: a_min,
        limit: 1.0 / lam,
        witness: vec![a_min_at],
    });
    checks.push(Check {
        name: "ellipticity upper".into(),
        passed: a_max < lam,
        observed: a_max,
        limit: lam,
        witness: vec![a_max_at],
    });

    let eta = coeffs.eta;
    let quotient = |x: f64, y: f64| {
        let d = (x - y).abs();
        if d == 0.0 {
            0.0
        } else {
            (coeffs.a(x) - coeffs.a(y)).abs() / d.powf(eta)
        }
    };
    let mut best = 0.0f64;
    let mut witness = None;
    let n = pts.len();
    let mut used = 0usize;
    'outer: for gap in 1..n {
        for i in 0..n - gap {
            if used >= pair_budget {
                break 'outer;
            }
            used += 1;
            let q = quotient(pts[i], pts[i + gap]);
            if q > best {
                best = q;
                witness = Some((pts[i], pts[i + gap]));
            }
        }
    }
    // Squeeze the worst pair: bounded quotients settle, jumps blow up.
    let mut unbounded = false;
    if let Some((x, y)) = witness {
        let (mut lo, mut hi) = (x, y);
        let mut q_prev = best;
        let mut growth = 0;
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            let (ql, qr) = (quotient(lo, mid), quotient(mid, hi));
            if ql >= qr {
                hi = mid;
            } else {
                lo = mid;
            }
            let q = ql.max(qr);
            if q > 1.5 * q_prev {
                growth += 1;
            }
            q_prev = q_prev.max(q);
        }
        if growth >= 20 {
            unbounded = true;
            best = q_prev;
            witness = Some((lo, hi));
        }
    }
    checks.push(Check {
        name: "Hoelder quotient of a below L".into(),
        passed: !unbounded && best <= coeffs.l_bound,
        observed: best,
        limit: coeffs.l_bound,
        witness: witness.map(|(x, y)| vec![x, y]).unwrap_or_default(),
    });

    ValidationReport { checks, max_holder_quotient: best, holder_witness: witness, holder_unbounded: unbounded }
}
