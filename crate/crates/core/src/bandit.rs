//! Linear bandits with Gaussian noise and best-arm identification under
//! reward-independent allocations.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::design::{solve_g_relaxed, DesignWeights, ExperimentPool, GreedyG, SINGULAR_RTOL};
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::sampling::Categorical;
use crate::spectral::{self, SymMatrix};

/// Default cap on the number of pulls of a best-arm run.
pub const DEFAULT_MAX_ROUNDS: u64 = 1_000_000;

/// Arms, unknown parameter and noise level of `r(x) = θ*ᵀx + R·ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditInstance {
    arms: ExperimentPool,
    theta_star: Vec<f64>,
    noise_std: f64,
}

impl BanditInstance {
    pub fn new(arms: ExperimentPool, theta_star: Vec<f64>, noise_std: f64) -> Result<Self> {
        if theta_star.len() != arms.dim() {
            return Err(invalid("theta_star and arm dimensions differ"));
        }
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(invalid(format!(
                "noise_std must be non-negative, got {noise_std}"
            )));
        }
        if theta_star.iter().any(|v| !v.is_finite()) {
            return Err(invalid("theta_star must be finite"));
        }
        Ok(BanditInstance {
            arms,
            theta_star,
            noise_std,
        })
    }

    pub fn arms(&self) -> &ExperimentPool {
        &self.arms
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn with_noise_std(mut self, noise_std: f64) -> Result<Self> {
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(invalid(format!(
                "noise_std must be non-negative, got {noise_std}"
            )));
        }
        self.noise_std = noise_std;
        Ok(self)
    }

    pub fn mean_reward(&self, arm: usize) -> f64 {
        linalg::dot(self.arms.row(arm), &self.theta_star)
    }

    /// Index of the best arm, or `None` when the maximum is shared.
    pub fn best_arm(&self) -> Option<usize> {
        let means: Vec<f64> = (0..self.arms.len()).map(|k| self.mean_reward(k)).collect();
        let best = argmax(&means);
        let unique = means
            .iter()
            .enumerate()
            .all(|(k, &m)| k == best || m < means[best]);
        unique.then_some(best)
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = k;
        }
    }
    best
}

/// Canonical basis of `R^d` plus `(cos ω, sin ω, 0, …)`, with `θ* = 2·e_1`
/// and unit noise.
pub fn soare_instance(d: usize, omega: f64) -> Result<BanditInstance> {
    if d < 2 {
        return Err(invalid(format!("soare instance needs d >= 2, got {d}")));
    }
    let mut rows: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut extra = vec![0.0; d];
    extra[0] = omega.cos();
    extra[1] = omega.sin();
    rows.push(extra);
    let mut theta = vec![0.0; d];
    theta[0] = 2.0;
    let inst = BanditInstance::new(ExperimentPool::new(rows)?, theta, 1.0)?;
    if inst.best_arm().is_none() {
        return Err(invalid(format!(
            "omega = {omega} leaves no unique best arm"
        )));
    }
    Ok(inst)
}

/// One noisy reward of `arm`.
pub fn pull<R: Rng + ?Sized>(inst: &BanditInstance, arm: usize, rng: &mut R) -> Result<f64> {
    if arm >= inst.arms.len() {
        return Err(invalid(format!(
            "arm {arm} out of range for {} arms",
            inst.arms.len()
        )));
    }
    let noise: f64 = rng.sample(StandardNormal);
    Ok(inst.mean_reward(arm) + inst.noise_std * noise)
}

fn normal_equations(x: &[Vec<f64>], r: &[f64]) -> Result<(SymMatrix, Vec<f64>)> {
    if x.len() != r.len() {
        return Err(invalid("design rows and rewards differ in length"));
    }
    let d = x
        .first()
        .map(Vec::len)
        .ok_or_else(|| invalid("no observations"))?;
    if d == 0 || x.iter().any(|row| row.len() != d) {
        return Err(invalid("design rows must share a positive dimension"));
    }
    let mut a = SymMatrix::zeros(d);
    let mut b = vec![0.0; d];
    for (row, &ri) in x.iter().zip(r) {
        a.add_outer(row, 1.0);
        b.iter_mut().zip(row).for_each(|(bj, xj)| *bj += ri * xj);
    }
    Ok((a, b))
}

fn solve_spd(a: &SymMatrix, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let d = a.dim();
    let mut g = a.as_slice().to_vec();
    if !linalg::cholesky_in_place(&mut g, d) {
        return Err(Error::Singular {
            lambda_min: spectral::lambda_min(a).unwrap_or(0.0),
        });
    }
    linalg::cholesky_solve(&g, d, &mut b);
    Ok(b)
}

/// Least squares `argmin ‖r − Xθ‖²`.
pub fn ols(x: &[Vec<f64>], r: &[f64]) -> Result<Vec<f64>> {
    let (a, b) = normal_equations(x, r)?;
    let sp = spectral::eigh(&a)?;
    if !(sp.min() > SINGULAR_RTOL * sp.max()) {
        return Err(Error::Singular {
            lambda_min: sp.min(),
        });
    }
    solve_spd(&a, b)
}

/// Ridge estimate `(XᵀX + λI)⁻¹ Xᵀr`.
pub fn ridge(x: &[Vec<f64>], r: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("ridge needs lambda > 0, got {lambda}")));
    }
    let (a, b) = normal_equations(x, r)?;
    solve_spd(&a.shifted(lambda), b)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("delta must lie in (0, 1), got {delta}")))
    }
}

fn matrix_norm(y: &[f64], a_inv: &SymMatrix) -> Result<f64> {
    if y.len() != a_inv.dim() {
        return Err(invalid("direction and matrix dimensions differ"));
    }
    Ok(a_inv.quad_form(y).max(0.0).sqrt())
}

/// Fixed-design width `2R‖y‖_{A⁻¹}√(2·log(6t²K/(π²δ)))`, with `K` the number
/// of directions covered by the union bound. A log below zero is taken as 0.
pub fn fixed_width(
    y: &[f64],
    a_inv: &SymMatrix,
    t: u64,
    directions: u64,
    delta: f64,
    r: f64,
) -> Result<f64> {
    check_delta(delta)?;
    if t == 0 || directions == 0 {
        return Err(invalid(
            "fixed_width needs t >= 1 and at least one direction",
        ));
    }
    let tf = t as f64;
    let arg = 6.0 * tf * tf * directions as f64 / (std::f64::consts::PI.powi(2) * delta);
    let log = arg.ln().max(0.0);
    Ok(2.0 * r * matrix_norm(y, a_inv)? * (2.0 * log).sqrt())
}

/// Self-normalized ridge width
/// `‖y‖_{A(λ)⁻¹}·(R√(d·log((1 + tL²/λ)/δ)) + √λ·S)`, `S ≥ ‖θ*‖`.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_width(
    y: &[f64],
    a_lambda_inv: &SymMatrix,
    t: u64,
    l: f64,
    lambda: f64,
    delta: f64,
    r: f64,
    theta_norm_bound: f64,
) -> Result<f64> {
    check_delta(delta)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let d = y.len() as f64;
    let log = ((1.0 + t as f64 * l * l / lambda) / delta).ln();
    Ok(matrix_norm(y, a_lambda_inv)? * (r * (d * log).sqrt() + lambda.sqrt() * theta_norm_bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopDecision {
    pub stop: bool,
    pub leader: usize,
}

/// Stop when the empirical leader beats every other arm by a strictly
/// positive margin at least as large as the fixed-design width of their
/// difference, with the union bound over `K(K−1)/2` directions.
pub fn stopping_check(
    theta_hat: &[f64],
    a_inv: &SymMatrix,
    arms: &ExperimentPool,
    t: u64,
    delta: f64,
    r: f64,
) -> Result<StopDecision> {
    if theta_hat.len() != arms.dim() {
        return Err(invalid("theta_hat and arm dimensions differ"));
    }
    let k_count = arms.len() as u64;
    let directions = (k_count * k_count.saturating_sub(1) / 2).max(1);
    let means: Vec<f64> = arms.rows().map(|x| linalg::dot(x, theta_hat)).collect();
    let leader = argmax(&means);
    let best = arms.row(leader);
    let mut y = vec![0.0; arms.dim()];
    for (k, x) in arms.rows().enumerate() {
        if k == leader {
            continue;
        }
        let gap = means[leader] - means[k];
        if !(gap > 0.0) {
            return Ok(StopDecision {
                stop: false,
                leader,
            });
        }
        y.iter_mut()
            .zip(best.iter().zip(x))
            .for_each(|(yi, (b, xi))| *yi = b - xi);
        if gap < fixed_width(&y, a_inv, t, directions, delta, r)? {
            return Ok(StopDecision {
                stop: false,
                leader,
            });
        }
    }
    Ok(StopDecision { stop: true, leader })
}

/// Allocation rule for [`run_bai`].
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// I.i.d. draws from a fixed design, normally the relaxed G-optimum.
    RandomizedG(DesignWeights),
    /// Arm minimizing the post-pull `max_k x_kᵀA⁻¹x_k`.
    GreedyG,
    Uniform,
}

impl Strategy {
    /// Randomized strategy over the relaxed G-optimal design of the arms.
    pub fn randomized_g(inst: &BanditInstance, tol: f64, max_iter: usize) -> Result<Self> {
        let sol = solve_g_relaxed(&inst.arms, tol, max_iter)?.require_converged()?;
        Ok(Strategy::RandomizedG(sol.weights))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::RandomizedG(_) => "randomized_g",
            Strategy::GreedyG => "greedy_g",
            Strategy::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: u64,
    pub arm: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BAIOutcome {
    /// Set iff `stopped`.
    pub identified_arm: Option<usize>,
    pub samples_used: u64,
    pub stopped: bool,
    pub history: Vec<RoundLog>,
}

/// Arms that grow the rank when scanned in index order. For a pool that
/// starts with the canonical basis this is exactly that basis.
pub fn spanning_subset(arms: &ExperimentPool) -> Vec<usize> {
    let tol = crate::design::RANK_RTOL * arms.max_sq_norm();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for (k, x) in arms.rows().enumerate() {
        // Gram–Schmidt residual against the arms already chosen.
        let mut res = x.to_vec();
        for q in &basis {
            let c = linalg::dot(&res, q);
            res.iter_mut().zip(q).for_each(|(r, qi)| *r -= c * qi);
        }
        let norm2 = linalg::dot(&res, &res);
        if norm2 > tol {
            let inv = 1.0 / norm2.sqrt();
            basis.push(res.iter().map(|v| v * inv).collect());
            chosen.push(k);
            if chosen.len() == arms.dim() {
                break;
            }
        }
    }
    chosen
}

enum Allocator<'a> {
    Randomized(Categorical),
    Greedy(GreedyG<'a>),
    Uniform(usize),
}

impl Allocator<'_> {
    fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        match self {
            Allocator::Randomized(c) => Ok(c.sample(rng)),
            Allocator::Greedy(g) => g.step(rng),
            Allocator::Uniform(k) => Ok(rng.random_range(0..*k)),
        }
    }
}

/// Best-arm identification with a fixed allocation rule.
///
/// Each arm of [`spanning_subset`] is pulled once, then one arm per round is
/// chosen by `strategy`. After every pull with an invertible design the OLS
/// estimate goes through [`stopping_check`]. Reaching `max_rounds` pulls
/// returns `stopped = false`.
pub fn run_bai<R: Rng + ?Sized>(
    inst: &BanditInstance,
    strategy: &Strategy,
    delta: f64,
    max_rounds: u64,
    rng: &mut R,
) -> Result<BAIOutcome> {
    check_delta(delta)?;
    if inst.best_arm().is_none() {
        return Err(invalid("best-arm identification needs a unique best arm"));
    }
    let arms = &inst.arms;
    let d = arms.dim();
    let mut allocator = match strategy {
        Strategy::RandomizedG(mu) => {
            if mu.len() != arms.len() {
                return Err(invalid("design and arm counts differ"));
            }
            Allocator::Randomized(Categorical::new(mu))
        }
        Strategy::GreedyG => Allocator::Greedy(GreedyG::new(arms)),
        Strategy::Uniform => Allocator::Uniform(arms.len()),
    };

    let init = spanning_subset(arms);
    if init.len() < d {
        return Err(Error::NonSpanningPool { dim: d });
    }
    let mut a = SymMatrix::zeros(d);
    let mut b = vec![0.0; d];
    let mut theta = vec![0.0; d];
    let mut history = Vec::new();
    let mut round = 0u64;
    let mut forced = init.into_iter();
    while round < max_rounds {
        let arm = match forced.next() {
            Some(k) => {
                if let Allocator::Greedy(g) = &mut allocator {
                    g.push(k);
                }
                k
            }
            None => allocator.next(rng)?,
        };
        let reward = pull(inst, arm, rng)?;
        let x = arms.row(arm);
        a.add_outer(x, 1.0);
        b.iter_mut().zip(x).for_each(|(bj, xj)| *bj += reward * xj);
        history.push(RoundLog { round, arm, reward });
        round += 1;
        if forced.len() > 0 {
            continue;
        }
        let Some(inv) = linalg::spd_inverse(a.as_slice(), d) else {
            continue;
        };
        linalg::mat_vec(&inv, d, &b, &mut theta);
        let a_inv = SymMatrix::from_row_major(d, inv)?;
        let decision = stopping_check(&theta, &a_inv, arms, round, delta, inst.noise_std)?;
        if decision.stop {
            return Ok(BAIOutcome {
                identified_arm: Some(decision.leader),
                samples_used: round,
                stopped: true,
                history,
            });
        }
    }
    Ok(BAIOutcome {
        identified_arm: None,
        samples_used: round,
        stopped: false,
        history,
    })
}
