use crate::core_num::special::{gauss, hermite};
use crate::error::{domain, Result};

/// Which one-sided limit to take when a density is evaluated at `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    #[default]
    Plus,
    Minus,
}

impl Side {
    #[inline]
    pub(crate) fn of(y: f64, side: Side) -> bool {
        y > 0.0 || (y == 0.0 && side == Side::Plus)
    }
}

/// Frozen skew process `x + σ(z) W + (2α − 1) L⁰` with variance `a_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenParam {
    pub a_z: f64,
    pub alpha: f64,
}

impl FrozenParam {
    /// `alpha` may sit on the closed interval: `1` is reflection into the
    /// positive half line, `0` into the negative one.
    pub fn new(a_z: f64, alpha: f64) -> Result<Self> {
        if !(a_z > 0.0) || !a_z.is_finite() {
            return domain(format!("frozen variance must be positive, got {a_z}"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return domain(format!("alpha must lie in [0, 1], got {alpha}"));
        }
        Ok(Self { a_z, alpha })
    }
}

/// Weights `(c1, c2)` with `p = c1 g(y − x) + c2 g(y + x)`.
#[inline]
pub(crate) fn case_weights(alpha: f64, x: f64, y_pos: bool) -> (f64, f64) {
    case_weights_pos(alpha, x >= 0.0, y_pos)
}

#[inline]
fn case_weights_pos(alpha: f64, x_pos: bool, y_pos: bool) -> (f64, f64) {
    match (x_pos, y_pos) {
        (true, true) => (1.0, 2.0 * alpha - 1.0),
        (true, false) => (2.0 * (1.0 - alpha), 0.0),
        (false, false) => (1.0, 1.0 - 2.0 * alpha),
        (false, true) => (2.0 * alpha, 0.0),
    }
}

/// Unchecked density, `y = 0` counted on the positive side.
#[inline]
pub(crate) fn density_raw(a_z: f64, alpha: f64, t: f64, x: f64, y: f64) -> f64 {
    let c = a_z * t;
    let (c1, c2) = case_weights(alpha, x, y >= 0.0);
    let mut v = c1 * gauss(c, y - x);
    if c2 != 0.0 {
        v += c2 * gauss(c, y + x);
    }
    v
}

/// Density with its first two derivatives in the starting point `x`.
#[inline]
pub(crate) fn density_dx12(a_z: f64, alpha: f64, t: f64, x: f64, y: f64) -> (f64, f64, f64) {
    density_dx12_case(a_z, alpha, t, x, x >= 0.0, y)
}

/// [`density_dx12`] with the starting-point case chosen explicitly, so that
/// `x = 0` can be read as `0⁻`.
#[inline]
pub(crate) fn density_dx12_case(a_z: f64, alpha: f64, t: f64, x: f64, x_pos: bool, y: f64) -> (f64, f64, f64) {
    let c = a_z * t;
    let (c1, c2) = case_weights_pos(alpha, x_pos, y >= 0.0);
    let u = y - x;
    let g = gauss(c, u);
    let mut p = c1 * g;
    let mut d1 = c1 * g * u / c;
    let mut d2 = c1 * g * (u * u / c - 1.0) / c;
    if c2 != 0.0 {
        let v = y + x;
        let gr = gauss(c, v);
        p += c2 * gr;
        d1 -= c2 * gr * v / c;
        d2 += c2 * gr * (v * v / c - 1.0) / c;
    }
    (p, d1, d2)
}

/// Transition density of the frozen process from `x` to `y` over time `t`,
/// written as in the two starting-point cases.
pub fn frozen_density(p: &FrozenParam, t: f64, x: f64, y: f64) -> Result<f64> {
    frozen_density_side(p, t, x, y, Side::Plus)
}

pub fn frozen_density_side(p: &FrozenParam, t: f64, x: f64, y: f64, side: Side) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("time must be positive, got {t}"));
    }
    let c = p.a_z * t;
    let (c1, c2) = case_weights(p.alpha, x, Side::of(y, side));
    Ok(c1 * gauss(c, y - x) + c2 * gauss(c, y + x))
}

/// `∂^order/∂x^order` of [`frozen_density`], `x ≠ 0` unless `alpha = 1/2`.
pub fn frozen_density_dx(order: usize, p: &FrozenParam, t: f64, x: f64, y: f64) -> Result<f64> {
    if order > 4 {
        return domain(format!("derivative order must be at most 4, got {order}"));
    }
    if !(t > 0.0) {
        return domain(format!("time must be positive, got {t}"));
    }
    if x == 0.0 && p.alpha != 0.5 {
        return domain("density is not differentiable in x at 0 when alpha != 1/2");
    }
    let c = p.a_z * t;
    let sc = c.sqrt();
    let scale = c.powf(-(order as f64) / 2.0);
    let (c1, c2) = case_weights(p.alpha, x, y >= 0.0);
    let direct = scale * hermite(order, (y - x) / sc) * gauss(c, y - x);
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    let mirror = sign * scale * hermite(order, (y + x) / sc) * gauss(c, y + x);
    Ok(c1 * direct + c2 * mirror)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_num::{quad_space_split, QuadConfig};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fp(a: f64, alpha: f64) -> FrozenParam {
        FrozenParam::new(a, alpha).unwrap()
    }

    #[test]
    fn value_at_origin() {
        let v = frozen_density(&fp(1.0, 0.7), 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(v, 1.4 / (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-14);
        let m = frozen_density_side(&fp(1.0, 0.7), 1.0, 0.0, 0.0, Side::Minus).unwrap();
        assert_relative_eq!(m, 0.6 / (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn one_sided_limits() {
        let p = fp(1.3, 0.8);
        for &x in &[-1.2, -0.1, 0.4, 2.0] {
            let g = gauss(1.3 * 0.6, x);
            let plus = frozen_density_side(&p, 0.6, x, 0.0, Side::Plus).unwrap();
            let minus = frozen_density_side(&p, 0.6, x, 0.0, Side::Minus).unwrap();
            assert_relative_eq!(plus, 2.0 * 0.8 * g, max_relative = 1e-14);
            assert_relative_eq!(minus, 2.0 * 0.2 * g, max_relative = 1e-14);
        }
    }

    #[test]
    fn half_is_gaussian() {
        let p = fp(2.0, 0.5);
        for &(x, y) in &[(0.0, 1.0), (-1.0, 0.5), (0.3, -2.0)] {
            assert_relative_eq!(frozen_density(&p, 0.7, x, y).unwrap(), gauss(1.4, y - x), max_relative = 1e-14);
            let d = frozen_density_dx(1, &p, 0.7, x, y).unwrap();
            assert_relative_eq!(d, gauss(1.4, y - x) * (y - x) / 1.4, max_relative = 1e-12);
        }
    }

    #[test]
    fn reflecting_derivative() {
        let p = fp(1.0, 1.0);
        let (x, y, t) = (0.4, 0.9, 0.5);
        let want = gauss(t, y - x) * (y - x) / t - gauss(t, y + x) * (y + x) / t;
        assert_relative_eq!(frozen_density_dx(1, &p, t, x, y).unwrap(), want, max_relative = 1e-13);
    }

    #[test]
    fn second_derivative_matches_difference() {
        let p = fp(1.0, 0.7);
        let h = 1e-4;
        let f = |x: f64| frozen_density_dx(1, &p, 0.5, x, 2.0).unwrap();
        let fd = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        assert_relative_eq!(frozen_density_dx(2, &p, 0.5, 1.0, 2.0).unwrap(), fd, max_relative = 1e-6);
    }

    #[test]
    fn domain_errors() {
        let p = fp(1.0, 0.7);
        assert!(frozen_density(&p, 0.0, 1.0, 1.0).is_err());
        assert!(frozen_density_dx(1, &p, 1.0, 0.0, 1.0).is_err());
        assert!(frozen_density_dx(1, &fp(1.0, 0.5), 1.0, 0.0, 1.0).is_ok());
        assert!(FrozenParam::new(0.0, 0.5).is_err());
        assert!(FrozenParam::new(1.0, 1.1).is_err());
    }

    #[test]
    fn dx12_agrees_with_generic() {
        let p = fp(1.7, 0.3);
        for &(x, y) in &[(0.5, 1.0), (0.5, -1.0), (-0.5, 1.0), (-0.5, -0.2)] {
            let (v, d1, d2) = density_dx12(1.7, 0.3, 0.4, x, y);
            assert_relative_eq!(v, frozen_density(&p, 0.4, x, y).unwrap(), max_relative = 1e-14);
            assert_relative_eq!(d1, frozen_density_dx(1, &p, 0.4, x, y).unwrap(), max_relative = 1e-12);
            assert_relative_eq!(d2, frozen_density_dx(2, &p, 0.4, x, y).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn normalization_lattice() {
        let cfg = QuadConfig { space_truncation_radius: 10.0, ..QuadConfig::default() };
        for &alpha in &[0.1, 0.5, 0.9] {
            for &t in &[0.01f64, 0.5, 2.0] {
                for &x in &[-1.0, 0.0, 1.0] {
                    let p = fp(1.0, alpha);
                    let sc = t.sqrt();
                    let f = |y: f64| frozen_density(&p, t, x, y).unwrap();
                    // mass sits near x and near −x
                    let m = quad_space_split(f, x, sc, &[0.0], &cfg).unwrap()
                        + if (2.0 * x).abs() > 20.0 * sc {
                            quad_space_split(f, -x, sc, &[0.0], &cfg).unwrap()
                        } else {
                            0.0
                        };
                    assert!((m - 1.0).abs() < 1e-8, "alpha={alpha} t={t} x={x}: {m}");
                }
            }
        }
    }

    #[test]
    fn chapman_kolmogorov() {
        let cfg = QuadConfig { space_truncation_radius: 10.0, space_nodes: 24, ..QuadConfig::default() };
        let p = fp(1.3, 0.75);
        for &(x, y) in &[(0.5, 1.0), (-0.3, 0.8), (0.2, -1.1), (-1.0, -0.4)] {
            let (s, t) = (0.3, 0.5);
            let f = |u: f64| frozen_density(&p, s, x, u).unwrap() * frozen_density(&p, t, u, y).unwrap();
            let v = quad_space_split(f, 0.5 * (x + y), (1.3f64 * 0.8).sqrt(), &[0.0], &cfg).unwrap();
            assert!((v - frozen_density(&p, s + t, x, y).unwrap()).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn derivatives_match_differences(order in 1usize..=4, x in prop_oneof![-2.0f64..-0.1, 0.1f64..2.0],
                                         y in -2.5f64..2.5, alpha in 0.05f64..0.95, a in 0.5f64..2.0, t in 0.2f64..1.5) {
            let p = fp(a, alpha);
            let h = 1e-5;
            let prev = |x: f64| if order == 1 {
                frozen_density(&p, t, x, y).unwrap()
            } else {
                frozen_density_dx(order - 1, &p, t, x, y).unwrap()
            };
            let fd = (prev(x + h) - prev(x - h)) / (2.0 * h);
            let an = frozen_density_dx(order, &p, t, x, y).unwrap();
            let scale = an.abs().max(1e-2 * (a * t).powf(-(order as f64 + 1.0) / 2.0));
            prop_assert!((an - fd).abs() <= 1e-5 * scale, "an={} fd={}", an, fd);
        }

        #[test]
        fn density_nonnegative(x in -3.0f64..3.0, y in -3.0f64..3.0, alpha in 0.0f64..=1.0, t in 0.01f64..3.0) {
            let p = fp(1.0, alpha);
            prop_assert!(frozen_density(&p, t, x, y).unwrap() >= 0.0);
        }
    }
}
