use serde::{Deserialize, Serialize};

use statrs::function::beta::ln_beta;

use crate::core_num::special::{gauss, ln_beta_product_bound};

/// User-supplied constants `(C, c)` of the kernel bound
/// `|H(s, t, x, y)| ≤ C (t−s)^{η/2−1} g_{c(t−s)}(y−x)`; the series tail is
/// bounded with them. Fitted certificates are a good source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub big_c: f64,
    pub small_c: f64,
}

impl Default for TailConstants {
    fn default() -> Self {
        Self { big_c: 1.0, small_c: 2.0 }
    }
}

/// `Σ_{r ≥ from} C^{r+1} t^{rη/2} ∏_{i ≤ r} B(1 + (i−1)η/2, η/2) · g_{ct}(y − x)`.
pub fn tail_bound(eta: f64, k: &TailConstants, from: usize, t: f64, x: f64, y: f64) -> f64 {
    if !(k.big_c > 0.0 && k.small_c > 0.0 && t > 0.0) {
        return f64::INFINITY;
    }
    let half = 0.5 * eta;
    let step = k.big_c.ln() + half * t.ln();
    let mut ln_term = ln_beta_product_bound(from, eta, k.big_c, t);
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for r in from..from + 1_000_000 {
        let term = ln_term.exp();
        if !term.is_finite() {
            return f64::INFINITY;
        }
        sum += term;
        if term < prev && term <= 1e-17 * sum {
            break;
        }
        prev = term;
        ln_term += step + ln_beta(1.0 + r as f64 * half, half);
    }
    sum * gauss(k.small_c * t, y - x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_num::beta_product_bound;
    use approx::assert_relative_eq;

    #[test]
    fn matches_explicit_sum() {
        let k = TailConstants { big_c: 0.8, small_c: 1.5 };
        let direct: f64 = (3..3000).map(|r| beta_product_bound(r, 0.5, 0.8, 0.6).unwrap()).sum();
        assert_relative_eq!(tail_bound(0.5, &k, 3, 0.6, 0.0, 0.0), direct * gauss(0.9, 0.0), max_relative = 1e-12);
    }

    #[test]
    fn shrinks_with_order() {
        let k = TailConstants::default();
        let a = tail_bound(1.0, &k, 2, 1.0, 0.0, 0.3);
        let b = tail_bound(1.0, &k, 5, 1.0, 0.0, 0.3);
        assert!(b < a && b > 0.0);
    }
}
