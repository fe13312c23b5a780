use statrs::function::{
    beta::ln_beta,
    erf::erfc,
    gamma::{gamma, ln_gamma},
};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{domain, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Heat kernel `g_C(z) = (2πC)^{-1/2} exp(-z²/(2C))`.
pub fn gaussian_kernel(c: f64, z: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return domain(format!("gaussian kernel variance must be positive, got {c}"));
    }
    Ok(gauss(c, z))
}

/// Unchecked heat kernel for inner loops; `c > 0` is the caller's job.
#[inline]
pub fn gauss(c: f64, z: f64) -> f64 {
    (-0.5 * z * z / c).exp() / (2.0 * PI * c).sqrt()
}

#[inline]
pub fn ln_gauss(c: f64, z: f64) -> f64 {
    -0.5 * z * z / c - 0.5 * c.ln() - LN_SQRT_2PI
}

/// Standard normal CDF.
#[inline]
pub fn norm_cdf(u: f64) -> f64 {
    0.5 * erfc(-u * FRAC_1_SQRT_2)
}

/// Standard normal survival function `Φ̄(u) = 1 − Φ(u)`.
#[inline]
pub fn norm_sf(u: f64) -> f64 {
    0.5 * erfc(u * FRAC_1_SQRT_2)
}

/// `ln Φ̄(u)`, accurate far into the upper tail.
pub fn ln_norm_sf(u: f64) -> f64 {
    if u < -5.0 {
        (-norm_sf(-u)).ln_1p()
    } else if u < 30.0 {
        norm_sf(u).ln()
    } else {
        // Mills ratio expansion.
        let v = 1.0 / (u * u);
        let series = 1.0 - v * (1.0 - 3.0 * v * (1.0 - 5.0 * v * (1.0 - 7.0 * v)));
        -0.5 * u * u - u.ln() - LN_SQRT_2PI + series.ln()
    }
}

/// `ln Φ(u)`.
#[inline]
pub fn ln_norm_cdf(u: f64) -> f64 {
    ln_norm_sf(-u)
}

/// Probabilists' Hermite polynomial `He_k(x)`.
pub fn hermite(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut h0, mut h1) = (1.0, x);
            for n in 1..k {
                let h2 = x * h1 - n as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    }
}

/// Result of a Mittag-Leffler evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MittagLeffler {
    pub value: f64,
    /// Set when a term or the sum left the range of `f64`; `value` is then
    /// clamped to `±f64::MAX`.
    pub saturated: bool,
    pub terms: usize,
}

const ML_MAX_ARG: f64 = 50.0;
const ML_MAX_TERMS: usize = 20_000;

/// `E_{a,b}(z) = Σ_n z^n / Γ(a n + b)` by direct summation in log space.
pub fn mittag_leffler(a: f64, b: f64, z: f64) -> Result<MittagLeffler> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("Mittag-Leffler needs a, b > 0 (got a={a}, b={b})"));
    }
    if !z.is_finite() || z.abs() > ML_MAX_ARG {
        return domain(format!("Mittag-Leffler argument |z| must be at most {ML_MAX_ARG}, got {z}"));
    }
    if z == 0.0 {
        return Ok(MittagLeffler { value: 1.0 / exact_gamma(b), saturated: false, terms: 1 });
    }
    let lz = z.abs().ln();
    let mut sum = 0.0f64;
    let mut prev = f64::INFINITY;
    for n in 0..ML_MAX_TERMS {
        let arg = a * n as f64 + b;
        let mag = if arg < 170.0 && n as f64 * lz < 690.0 {
            z.abs().powi(n as i32) / exact_gamma(arg)
        } else {
            let ln_term = n as f64 * lz - ln_gamma(arg);
            if ln_term > 709.0 {
                let sign = if z < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
                return Ok(MittagLeffler { value: sign * f64::MAX, saturated: true, terms: n + 1 });
            }
            ln_term.exp()
        };
        let term = if z < 0.0 && n % 2 == 1 { -mag } else { mag };
        sum += term;
        if !sum.is_finite() {
            return Ok(MittagLeffler { value: f64::MAX.copysign(sum), saturated: true, terms: n + 1 });
        }
        if n > 0 && mag < prev && mag <= 1e-17 * sum.abs() + 1e-300 {
            return Ok(MittagLeffler { value: sum, saturated: false, terms: n + 1 });
        }
        prev = mag;
    }
    Ok(MittagLeffler { value: sum, saturated: true, terms: ML_MAX_TERMS })
}

/// Γ with exact values at small positive integers.
fn exact_gamma(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=30.0).contains(&x) {
        (2..x as u32).fold(1.0, |acc, k| acc * k as f64)
    } else {
        gamma(x)
    }
}

/// `C^{r+1} dt^{rη/2} ∏_{i=1}^{r} B(1 + (i−1)η/2, η/2)`: the size of the
/// `r`-th iterated parametrix term without its Gaussian factor.
pub fn beta_product_bound(r: usize, eta: f64, c: f64, dt: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return domain(format!("Hölder exponent must lie in (0, 1], got {eta}"));
    }
    if !(c > 0.0) || !(dt > 0.0) {
        return domain(format!("bound needs C > 0 and dt > 0 (got C={c}, dt={dt})"));
    }
    Ok(ln_beta_product_bound(r, eta, c, dt).exp())
}

pub(crate) fn ln_beta_product_bound(r: usize, eta: f64, c: f64, dt: f64) -> f64 {
    let half = 0.5 * eta;
    let mut ln = (r + 1) as f64 * c.ln() + r as f64 * half * dt.ln();
    for i in 1..=r {
        ln += ln_beta(1.0 + (i - 1) as f64 * half, half);
    }
    ln
}
