//! Relaxed G-optimal design through the D-optimal multiplicative update.
//!
//! At the D-optimum the leverages `x_kᵀ M⁻¹ x_k` are all ≤ d, which is also
//! the G-optimum. The update `μ_k ← μ_k · lev_k / d` keeps μ on the simplex
//! (leverages average to d under μ) and never decreases `log det M(μ)`.

use super::{weighted_gram, DesignSolution, DesignWeights, ExperimentPool};
use crate::error::{invalid, Result};
use crate::linalg;

const WEIGHT_FLOOR: f64 = 1e-15;

/// Solve until `crit_G ≤ d·(1 + tol)` or `max_iter` updates have run.
pub fn solve_g_relaxed(pool: &ExperimentPool, tol: f64, max_iter: usize) -> Result<DesignSolution> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    pool.require_spanning()?;
    let d = pool.dim() as f64;
    let mut mu = vec![1.0 / pool.len() as f64; pool.len()];
    let mut lev = vec![0.0; pool.len()];
    let mut iterations = 0;
    loop {
        let crit = leverages(pool, &mu, &mut lev)?;
        let gap = crit / d - 1.0;
        if gap <= tol || iterations >= max_iter {
            return Ok(DesignSolution {
                weights: DesignWeights::normalized(mu)?,
                objective: crit,
                certificate_gap: gap.max(0.0),
                iterations,
                converged: gap <= tol,
            });
        }
        multiplicative_step(&mut mu, &lev, d);
        iterations += 1;
    }
}

/// Fill `lev` with `x_kᵀ M(μ)⁻¹ x_k` and return the maximum.
fn leverages(pool: &ExperimentPool, mu: &[f64], lev: &mut [f64]) -> Result<f64> {
    let m = weighted_gram(pool, mu);
    let dim = pool.dim();
    let inv = linalg::spd_inverse(m.as_slice(), dim).ok_or_else(|| crate::Error::Singular {
        lambda_min: crate::spectral::lambda_min(&m).unwrap_or(0.0),
    })?;
    let mut top = f64::NEG_INFINITY;
    for (k, x) in pool.rows().enumerate() {
        lev[k] = linalg::quad_form(&inv, dim, x);
        top = top.max(lev[k]);
    }
    Ok(top)
}

fn multiplicative_step(mu: &mut [f64], lev: &[f64], d: f64) {
    for (m, l) in mu.iter_mut().zip(lev) {
        *m *= l / d;
        if *m < WEIGHT_FLOOR {
            *m = 0.0;
        }
    }
    let sum: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|m| *m /= sum);
}
