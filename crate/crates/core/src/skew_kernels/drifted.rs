use super::frozen::Side;
use crate::core_num::special::{ln_gauss, ln_norm_sf, norm_cdf, norm_sf};
use crate::core_num::RngStream;
use crate::error::{domain, Error, Result};

/// Skew Brownian motion with constant drift `mu`, started at `x0`, after time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftedSkewParam {
    pub alpha: f64,
    pub mu: f64,
    pub t: f64,
    pub x0: f64,
}

impl DriftedSkewParam {
    pub fn new(alpha: f64, mu: f64, t: f64, x0: f64) -> Result<Self> {
        let p = Self { alpha, mu, t, x0 };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return domain(format!("time must be positive, got {}", self.t));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return domain(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !self.mu.is_finite() || !self.x0.is_finite() {
            return domain("drift and start point must be finite");
        }
        Ok(())
    }
}

/// `sign · exp(ln_w) · g_t(y − mean)`
#[derive(Debug, Clone, Copy, Default)]
struct Term {
    sign: f64,
    ln_w: f64,
    mean: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Terms {
    items: [Term; 3],
    len: usize,
}

impl Terms {
    fn push(&mut self, t: Term) {
        self.items[self.len] = t;
        self.len += 1;
    }

    fn iter(&self) -> std::slice::Iter<'_, Term> {
        self.items[..self.len].iter()
    }
}

/// Closed-form law of one drifted skew step, with everything that does not
/// depend on `y` computed once.
///
/// On each half line the density is a short sum of Gaussians plus one
/// `exp(β y) Φ̄(a ± y/√t)` term carrying the drift/skew interaction.
#[derive(Debug, Clone, Copy)]
pub struct DriftedSkewLaw {
    p: DriftedSkewParam,
    s: f64,
    pos: Terms,
    neg: Terms,
    c: f64,
    a: f64,
    beta_pos: f64,
    beta_neg: f64,
    j_pos: f64,
    j_neg: f64,
    mass_neg: f64,
}

impl DriftedSkewLaw {
    pub fn new(p: DriftedSkewParam) -> Result<Self> {
        p.check()?;
        let DriftedSkewParam { alpha, mu, t, x0 } = p;
        let s = t.sqrt();
        let r = x0.abs();
        let kappa = mu * (2.0 * alpha - 1.0);
        let mut pos = Terms::default();
        let mut neg = Terms::default();
        // paths that have not reached 0 yet, killed at 0
        let killed = [
            Term { sign: 1.0, ln_w: 0.0, mean: x0 + mu * t },
            Term { sign: -1.0, ln_w: -2.0 * mu * x0, mean: -x0 + mu * t },
        ];
        if x0 > 0.0 {
            killed.into_iter().for_each(|k| pos.push(k));
        } else if x0 < 0.0 {
            killed.into_iter().for_each(|k| neg.push(k));
        }
        if alpha > 0.0 {
            pos.push(Term { sign: 1.0, ln_w: (2.0 * alpha).ln() - mu * (r + x0), mean: -r + mu * t });
        }
        if alpha < 1.0 {
            neg.push(Term { sign: 1.0, ln_w: (2.0 * (1.0 - alpha)).ln() + mu * (r - x0), mean: r + mu * t });
        }
        let mut law = Self {
            p,
            s,
            pos,
            neg,
            c: -mu * x0 + kappa * r + 0.5 * (kappa * kappa - mu * mu) * t,
            a: (r + kappa * t) / s,
            beta_pos: 2.0 * alpha * mu,
            beta_neg: 2.0 * (1.0 - alpha) * mu,
            j_pos: -2.0 * kappa * alpha,
            j_neg: -2.0 * kappa * (1.0 - alpha),
            mass_neg: 0.0,
        };
        law.mass_neg = law.cdf_neg(0.0).clamp(0.0, 1.0);
        Ok(law)
    }

    pub fn param(&self) -> &DriftedSkewParam {
        &self.p
    }

    /// Probability of ending strictly below 0.
    pub fn mass_negative(&self) -> f64 {
        self.mass_neg
    }

    pub fn density(&self, y: f64) -> f64 {
        self.density_side(y, Side::Plus)
    }

    pub fn density_side(&self, y: f64, side: Side) -> f64 {
        let t = self.p.t;
        let v = if Side::of(y, side) {
            let mut v: f64 = self.pos.iter().map(|m| m.sign * (m.ln_w + ln_gauss(t, y - m.mean)).exp()).sum();
            if self.j_pos != 0.0 {
                v += self.j_pos * (self.c + self.beta_pos * y + ln_norm_sf(self.a + y / self.s)).exp();
            }
            v
        } else {
            let mut v: f64 = self.neg.iter().map(|m| m.sign * (m.ln_w + ln_gauss(t, y - m.mean)).exp()).sum();
            if self.j_neg != 0.0 {
                v += self.j_neg * (self.c + self.beta_neg * y + ln_norm_sf(self.a - y / self.s)).exp();
            }
            v
        };
        v.max(0.0)
    }

    /// `P(Y ≤ y)` for `y < 0`.
    fn cdf_neg(&self, y: f64) -> f64 {
        let s = self.s;
        let mut v: f64 = self.neg.iter().map(|m| m.sign * m.ln_w.exp() * norm_cdf((y - m.mean) / s)).sum();
        if self.j_neg != 0.0 {
            v += self.j_neg * self.exp_c_tail(-y, -self.beta_neg);
        }
        v
    }

    /// `P(Y > y)` for `y ≥ 0`.
    fn sf_pos(&self, y: f64) -> f64 {
        let s = self.s;
        let mut v: f64 = self.pos.iter().map(|m| m.sign * m.ln_w.exp() * norm_sf((y - m.mean) / s)).sum();
        if self.j_pos != 0.0 {
            v += self.j_pos * self.exp_c_tail(y, self.beta_pos);
        }
        v
    }

    /// `e^C ∫_{y0}^∞ e^{β w} Φ̄(a + w/√t) dw`, by integration by parts in
    /// log space so that neither factor over- or underflows on its own.
    fn exp_c_tail(&self, y0: f64, beta: f64) -> f64 {
        if beta == 0.0 {
            return 0.0;
        }
        let s = self.s;
        let u0 = self.a + y0 / s;
        let ln_m = |u: f64| 0.5 * u * u + ln_norm_sf(u);
        let d = ln_m(u0 - beta * s) - ln_m(u0);
        let ln_abs_expm1 = if d > 0.0 { d + (-(-d).exp()).ln_1p() } else { (-d.exp_m1()).ln() };
        (self.c + beta * y0 + ln_norm_sf(u0) + ln_abs_expm1 - beta.abs().ln()).exp()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let v = if y < 0.0 { self.cdf_neg(y) } else { 1.0 - self.sf_pos(y) };
        v.clamp(0.0, 1.0)
    }

    /// Draws one exact sample using `stream`.
    pub fn sample(&self, stream: &mut RngStream) -> Result<f64> {
        let DriftedSkewParam { alpha, mu, t, x0 } = self.p;
        let s = self.s;
        if alpha == 0.5 {
            return Ok(x0 + mu * t + s * stream.normal());
        }
        if mu == 0.0 {
            // |x0 + W| by reflection; a crossing of 0 picks the side afresh
            let e = x0.abs() + s * stream.normal();
            let hit = e < 0.0 || x0 == 0.0 || stream.uniform() < (-2.0 * x0.abs() * e / t).exp();
            return Ok(if hit {
                if stream.uniform() < alpha {
                    e.abs()
                } else {
                    -e.abs()
                }
            } else {
                x0.signum() * e
            });
        }
        let u = stream.uniform();
        self.invert(u)
    }

    /// Quantile at level `u ∈ (0, 1)`.
    pub fn invert(&self, u: f64) -> Result<f64> {
        let s = self.s;
        if u < self.mass_neg {
            // F_neg(y) = u on (-∞, 0)
            let mut lo = -s;
            let mut k = 0;
            while self.cdf_neg(lo) > u {
                lo *= 2.0;
                k += 1;
                if k > 80 {
                    return Err(self.bracket_failure(u, lo));
                }
            }
            self.solve(lo, 0.0, |y| self.cdf_neg(y) - u, |y| self.density_side(y, Side::Minus), u)
        } else {
            let target = 1.0 - u;
            let mut hi = s;
            let mut k = 0;
            while self.sf_pos(hi) > target {
                hi *= 2.0;
                k += 1;
                if k > 80 {
                    return Err(self.bracket_failure(u, hi));
                }
            }
            self.solve(0.0, hi, |y| target - self.sf_pos(y), |y| self.density_side(y, Side::Plus), u)
        }
    }

    fn bracket_failure(&self, u: f64, reached: f64) -> Error {
        Error::Numeric(format!("could not bracket quantile {u} of skew step {:?}, search reached {reached}", self.p))
    }

    /// Safeguarded Newton on an increasing `f` with `f(lo) ≤ 0 ≤ f(hi)`.
    fn solve(&self, mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, u: f64) -> Result<f64> {
        let mut y = 0.5 * (lo + hi);
        for _ in 0..200 {
            let v = f(y);
            if v == 0.0 {
                return Ok(y);
            }
            if v < 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let d = df(y);
            let mut next = if d > 0.0 { y - v / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let tol = 1e-14 * (1.0 + next.abs()) * self.s.max(1e-3);
            if (next - y).abs() <= tol || hi - lo <= tol {
                return Ok(next);
            }
            y = next;
        }
        Err(Error::Numeric(format!(
            "quantile {u} of skew step {:?} did not converge, bracket [{lo}, {hi}]",
            self.p
        )))
    }
}

/// Density `q(t, x0, y)` of the drifted skew step.
pub fn drifted_skew_density(p: &DriftedSkewParam, y: f64) -> Result<f64> {
    Ok(DriftedSkewLaw::new(*p)?.density(y))
}

/// One exact draw from the law of the drifted skew step.
pub fn sample_skew_step(stream: &mut RngStream, p: &DriftedSkewParam) -> Result<f64> {
    DriftedSkewLaw::new(*p)?.sample(stream)
}
