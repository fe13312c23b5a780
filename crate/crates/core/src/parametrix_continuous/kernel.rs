use crate::error::{domain, Result};
use crate::model::Coefficients;
use crate::skew_kernels::{density_dx12, density_dx12_case};

/// Parametrix kernel `H(s, t, x, y) = b(x) ∂_x p̃ + (a(x) − a(y))/2 ∂²_x p̃`
/// with `p̃` frozen at the terminal point `y`. `y = 0` is read as `0⁺`.
#[allow(non_snake_case)]
pub fn kernel_H(coeffs: &Coefficients, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    if !(s < t) {
        return domain(format!("kernel needs s < t (s={s}, t={t})"));
    }
    if x == 0.0 && coeffs.alpha != 0.5 {
        return domain("kernel is not defined at x = 0 when alpha != 1/2");
    }
    Ok(h_value(coeffs, t - s, x, y, coeffs.a(y)))
}

/// `H` over elapsed time `tau` with the frozen variance `a_y = a(y)` passed in.
#[inline]
pub(crate) fn h_value(coeffs: &Coefficients, tau: f64, x: f64, y: f64, a_y: f64) -> f64 {
    let (_, d1, d2) = density_dx12(a_y, coeffs.alpha, tau, x, y);
    coeffs.b(x) * d1 + 0.5 * (coeffs.a(x) - a_y) * d2
}

/// Skew-weighted limit `α H(0⁺) + (1 − α) H(0⁻)` used when a series starts
/// exactly at the origin, where `H` itself is undefined.
pub(crate) fn h_at_origin(coeffs: &Coefficients, tau: f64, y: f64, a_y: f64) -> f64 {
    let alpha = coeffs.alpha;
    let side = |pos: bool| {
        let z = if pos { f64::MIN_POSITIVE } else { -f64::MIN_POSITIVE };
        let (_, d1, d2) = density_dx12_case(a_y, alpha, tau, 0.0, pos, y);
        coeffs.b(z) * d1 + 0.5 * (coeffs.a(z) - a_y) * d2
    };
    alpha * side(true) + (1.0 - alpha) * side(false)
}

/// `H` from `x`, falling back to the origin limit at `x = 0`.
#[inline]
pub(crate) fn h_from(coeffs: &Coefficients, tau: f64, x: f64, y: f64, a_y: f64) -> f64 {
    if x == 0.0 {
        h_at_origin(coeffs, tau, y, a_y)
    } else {
        h_value(coeffs, tau, x, y, a_y)
    }
}
