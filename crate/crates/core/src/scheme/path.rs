use serde::Serialize;

use crate::core_num::RngStream;
use crate::error::{domain, Error, Result};
use crate::model::{Coefficients, TimeGrid};
use crate::skew_kernels::{DriftedSkewLaw, DriftedSkewParam, Side};

/// One simulated trajectory of the scheme on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub grid: TimeGrid,
    pub states: Vec<f64>,
    pub seed: u64,
    pub stream_id: u64,
}

/// Law of one scheme step from `yk`: `σ(yk)·Z` with `Z` a skew Brownian
/// motion with drift `b(yk)/σ(yk)` started at `yk/σ(yk)`.
#[derive(Debug, Clone, Copy)]
pub struct StepLaw {
    law: DriftedSkewLaw,
    sigma: f64,
}

impl StepLaw {
    pub fn new(coeffs: &Coefficients, h: f64, yk: f64) -> Result<Self> {
        let sigma = coeffs.sigma(yk);
        if !(sigma > 0.0) {
            return domain(format!("sigma({yk}) = {sigma} is not positive"));
        }
        let p = DriftedSkewParam::new(coeffs.alpha, coeffs.b(yk) / sigma, h, yk / sigma)?;
        Ok(Self { law: DriftedSkewLaw::new(p)?, sigma })
    }

    #[inline]
    pub fn density(&self, y: f64) -> f64 {
        self.law.density(y / self.sigma) / self.sigma
    }

    #[inline]
    pub fn density_side(&self, y: f64, side: Side) -> f64 {
        self.law.density_side(y / self.sigma, side) / self.sigma
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.law.cdf(y / self.sigma)
    }

    #[inline]
    pub fn sample(&self, stream: &mut RngStream) -> Result<f64> {
        Ok(self.sigma * self.law.sample(stream)?)
    }
}

/// `p_N(t_k, t_{k+1}, yk, yk1)`.
pub fn one_step_density(coeffs: &Coefficients, h: f64, yk: f64, yk1: f64) -> Result<f64> {
    if !(h > 0.0) {
        return domain(format!("step must be positive, got {h}"));
    }
    Ok(StepLaw::new(coeffs, h, yk)?.density(yk1))
}

fn step(coeffs: &Coefficients, h: f64, y: f64, stream: &mut RngStream, k: usize) -> Result<f64> {
    StepLaw::new(coeffs, h, y)
        .and_then(|law| law.sample(stream))
        .map_err(|e| Error::Numeric(format!("scheme step {k} from {y}: {e}")))
}

/// Full trajectory `X^N_{t_0}, …, X^N_{t_N}`.
pub fn simulate_path(coeffs: &Coefficients, grid: &TimeGrid, stream: &mut RngStream, x0: f64) -> Result<PathSample> {
    let h = grid.h();
    let mut states = Vec::with_capacity(grid.steps() + 1);
    states.push(x0);
    let mut y = x0;
    for k in 0..grid.steps() {
        y = step(coeffs, h, y, stream, k)?;
        states.push(y);
    }
    Ok(PathSample { grid: *grid, states, seed: stream.seed(), stream_id: stream.stream_id() })
}

/// Terminal value only; same draws as [`simulate_path`].
pub fn simulate_terminal(coeffs: &Coefficients, grid: &TimeGrid, stream: &mut RngStream, x0: f64) -> Result<f64> {
    let h = grid.h();
    let mut y = x0;
    for k in 0..grid.steps() {
        y = step(coeffs, h, y, stream, k)?;
    }
    Ok(y)
}
