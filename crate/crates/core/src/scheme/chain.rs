use super::path::StepLaw;
use crate::core_num::{PanelGrid, QuadConfig};
use crate::error::{domain, Error, Result};
use crate::model::{Coefficients, TimeGrid};

const CHAIN_MAX_STEPS: usize = 3;

/// Density of `X^N_{t_i}` given `X^N_{t_j} = x`, by direct composition of
/// one-step densities. A brute-force oracle for at most three steps.
pub fn chain_density(coeffs: &Coefficients, grid: &TimeGrid, j: usize, i: usize, x: f64, y: f64, quad: &QuadConfig) -> Result<f64> {
    quad.validate()?;
    if i <= j || i > grid.steps() {
        return domain(format!("chain needs j < i <= N (j={j}, i={i}, N={})", grid.steps()));
    }
    let steps = i - j;
    if steps > CHAIN_MAX_STEPS {
        return Err(Error::Refused(format!("chain of {steps} steps exceeds the cost guard of {CHAIN_MAX_STEPS}")));
    }
    let h = grid.h();
    if steps == 1 {
        return Ok(StepLaw::new(coeffs, h, x)?.density(y));
    }
    let coarse = compose(coeffs, h, steps, x, y, quad, quad.space_nodes)?;
    let fine = compose(coeffs, h, steps, x, y, quad, 2 * quad.space_nodes)?;
    if (fine - coarse).abs() > quad.abs_tol + quad.rel_tol * fine.abs() {
        return Err(Error::Accuracy { context: format!("chain density over {steps} steps"), estimate: (fine - coarse).abs() });
    }
    Ok(fine)
}

fn compose(coeffs: &Coefficients, h: f64, steps: usize, x: f64, y: f64, quad: &QuadConfig, nodes: usize) -> Result<f64> {
    let span = steps as f64 * h;
    let guess = coeffs.envelope(x.min(y) - 10.0, x.max(y) + 10.0);
    let reach = quad.space_truncation_radius * (guess.a_max * span).sqrt() + guess.b_sup * span;
    let (lo, hi) = (x.min(y) - reach, x.max(y) + reach);
    let env = coeffs.envelope(lo, hi);
    let (edges, grade) = coeffs.split_layout();
    let width = 2.0 * (env.a_min * h).sqrt();
    let g = PanelGrid::build(lo, hi, width, &edges, &grade, if grade.is_empty() { 0 } else { 20 }, nodes);
    let laws: Vec<StepLaw> = g.nodes.iter().map(|&z| StepLaw::new(coeffs, h, z)).collect::<Result<_>>()?;
    let start = StepLaw::new(coeffs, h, x)?;
    let mut v: Vec<f64> = g.nodes.iter().zip(&g.weights).map(|(&z, &w)| w * start.density(z)).collect();
    for _ in 2..steps {
        v = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(&z2, &w2)| w2 * v.iter().zip(&laws).map(|(&m, law)| m * law.density(z2)).sum::<f64>())
            .collect();
    }
    Ok(v.iter().zip(&laws).map(|(&m, law)| m * law.density(y)).sum())
}
