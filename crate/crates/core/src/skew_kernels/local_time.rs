use crate::core_num::special::gauss;
use crate::core_num::{quad_time_singular_gap, QuadConfig};
use crate::error::{domain, Error, Result};

/// `E[L⁰_s]` for the frozen process with variance `a_val` started at `x`:
/// `a ∫_0^s g_{a u}(x) du`. The symmetric local time does not see `alpha`.
pub fn local_time_mean(a_val: f64, _alpha: f64, s: f64, x: f64) -> Result<f64> {
    if !(a_val > 0.0) || !(s > 0.0) {
        return domain(format!("local time mean needs a > 0 and s > 0 (a={a_val}, s={s})"));
    }
    // u^{-1/2} at u = 0; for x ≠ 0 a boundary layer of width x²/a instead,
    // which may need a few doublings
    let mut cfg = QuadConfig { time_nodes: 32, abs_tol: 1e-13, rel_tol: 1e-11, ..QuadConfig::default() };
    loop {
        match quad_time_singular_gap(|_, gap| a_val * gauss(a_val * gap, x), 0.0, s, 0.5, &cfg) {
            Err(Error::Accuracy { .. }) if cfg.time_nodes < 2048 => cfg.time_nodes *= 2,
            r => return r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_num::special::norm_sf;
    use approx::assert_relative_eq;

    // closed form of a ∫_0^s g_{au}(x) du
    fn exact(a: f64, s: f64, x: f64) -> f64 {
        let v = a * s;
        (2.0 * v / std::f64::consts::PI).sqrt() * (-x * x / (2.0 * v)).exp() - 2.0 * x.abs() * norm_sf(x.abs() / v.sqrt())
    }

    #[test]
    fn start_at_zero() {
        for &(a, s) in &[(1.0, 1.0), (2.5, 0.3), (0.6, 4.0)] {
            let want = (2.0 * a * s / std::f64::consts::PI).sqrt();
            assert_relative_eq!(local_time_mean(a, 0.7, s, 0.0).unwrap(), want, max_relative = 1e-10);
        }
    }

    #[test]
    fn matches_closed_form_away_from_zero() {
        assert!((local_time_mean(1.0, 0.3, 1.0, 1.0).unwrap() - exact(1.0, 1.0, 1.0)).abs() < 1e-8);
        for &x in &[-2.0, -0.01, 0.001, 0.3, 3.0] {
            let v = local_time_mean(1.4, 0.5, 0.8, x).unwrap();
            assert!((v - exact(1.4, 0.8, x)).abs() < 1e-9, "x={x}: {v} vs {}", exact(1.4, 0.8, x));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(local_time_mean(0.0, 0.5, 1.0, 0.0).is_err());
        assert!(local_time_mean(1.0, 0.5, 0.0, 0.0).is_err());
    }
}
