use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Uniform time grid `t_i = i·T/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_end: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n: usize) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return domain(format!("horizon T must be positive, got {t_end}"));
        }
        if n == 0 {
            return domain("step count N must be at least 1");
        }
        Ok(Self { t_end, n })
    }

    pub fn horizon(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.t_end / self.n as f64
    }

    /// `t_i`, computed as `i·T/N` so it never accumulates rounding; the
    /// last point is `T` itself.
    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        if i == self.n {
            self.t_end
        } else {
            i as f64 * self.t_end / self.n as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.time(i)).collect()
    }

    /// Index of the last grid time at or before `s`.
    pub fn floor_index(&self, s: f64) -> Result<usize> {
        if !(0.0..=self.t_end).contains(&s) {
            return domain(format!("time {s} outside [0, {}]", self.t_end));
        }
        let mut i = ((s / self.t_end) * self.n as f64).floor() as usize;
        i = i.min(self.n);
        while i > 0 && self.time(i) > s {
            i -= 1;
        }
        while i < self.n && self.time(i + 1) <= s {
            i += 1;
        }
        Ok(i)
    }

    /// `φ_N(s)`: the last grid time at or before `s`.
    pub fn phi_n(&self, s: f64) -> Result<f64> {
        Ok(self.time(self.floor_index(s)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn floor_examples() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(g.phi_n(0.3).unwrap(), 0.25);
        assert_eq!(g.phi_n(0.25).unwrap(), 0.25);
        assert_eq!(g.phi_n(0.999).unwrap(), 0.75);
        assert_eq!(g.phi_n(1.0).unwrap(), 1.0);
        assert!(g.phi_n(-0.1).is_err());
        assert!(g.phi_n(1.1).is_err());
    }

    #[test]
    fn endpoints_exact() {
        for n in [1, 3, 7, 10, 64] {
            let g = TimeGrid::new(0.7, n).unwrap();
            assert_eq!(g.time(0), 0.0);
            assert_eq!(g.time(n), 0.7);
        }
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(0.0, 3).is_err());
    }

    proptest! {
        #[test]
        fn phi_is_grid_floor(t_end in 0.1f64..5.0, n in 1usize..200, frac in 0.0f64..=1.0) {
            let g = TimeGrid::new(t_end, n).unwrap();
            let s = frac * t_end;
            let i = g.floor_index(s).unwrap();
            prop_assert!(g.time(i) <= s);
            prop_assert!(i == n || g.time(i + 1) > s);
            prop_assert_eq!(g.phi_n(g.time(i)).unwrap(), g.time(i));
        }
    }
}
