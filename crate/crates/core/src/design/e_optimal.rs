//! Relaxed E-optimal design: maximize `λ_min(M(μ))` over the simplex.
//!
//! By SDP duality the optimum equals
//!
//! ```text
//! min t   subject to   x_kᵀ V x_k ≤ t  (all k),   tr V = 1,   V ⪰ 0
//! ```
//!
//! which has only `d(d+1)/2 + 1` unknowns however large the pool is. The
//! dual is solved with a log-barrier method,
//!
//! ```text
//! ψ(V, t) = τ t − Σ_k log(t − x_kᵀ V x_k) − log det V,
//! ```
//!
//! and primal weights are read off the barrier multipliers,
//! `μ_k ∝ 1 / (t − x_kᵀ V x_k)`. Every iterate yields the certificate
//! `max_k x_kᵀ V x_k − λ_min(M(μ))`, an upper bound on the distance of μ
//! from the optimum.

use super::{weighted_gram, DesignSolution, DesignWeights, ExperimentPool};
use crate::error::{invalid, Result};
use crate::linalg::{self, cholesky_in_place, cholesky_solve};
use crate::spectral;

const BARRIER_GROWTH: f64 = 8.0;
const CENTERING_TOL: f64 = 1e-6;
const MAX_BACKTRACKS: usize = 60;
const TRIM_RTOL: f64 = 1e-3;
/// Give up after this many Newton steps without a 0.1% gap improvement.
const STALL_ITERS: usize = 40;

/// Solve the relaxed E-optimal design to an absolute certificate gap `tol`.
///
/// `max_iter` bounds the number of Newton steps. When it is reached, or the
/// gap stops improving at working precision, the best primal iterate is
/// returned with `converged = false`.
pub fn solve_e_relaxed(pool: &ExperimentPool, tol: f64, max_iter: usize) -> Result<DesignSolution> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    pool.require_spanning()?;
    let scale = pool.max_sq_norm();
    let dual = Dual::new(pool);
    let tol_scaled = tol / scale;
    let (d, r) = (dual.dim, dual.r);

    // Start from V = I/d and the uniform design.
    let mut v = vec![0.0; r];
    for i in 0..d {
        v[dual.diag_index[i]] = 1.0 / d as f64;
    }
    let mut best = Incumbent::new(&dual, vec![1.0 / dual.count as f64; dual.count], &v)?;
    if best.gap() <= tol_scaled {
        return finish(pool, best, 0, true);
    }
    let mut t = dual.max_quad(&v) + 1.0 / d as f64;
    let mut tau = (dual.count + d) as f64 / best.gap();
    let mut iterations = 0;

    let mut last_gain = 0;
    while iterations < max_iter && iterations - last_gain < STALL_ITERS {
        iterations += 1;
        let Some(step) = dual.newton_step(&mut v, &mut t, tau) else {
            break;
        };
        let before = best.gap();
        best.offer(&dual, &v, t)?;
        if best.gap() <= tol_scaled {
            return finish(pool, best, iterations, true);
        }
        if best.gap() < 0.999 * before {
            last_gain = iterations;
        }
        if step <= CENTERING_TOL {
            tau *= BARRIER_GROWTH;
        }
    }
    let converged = best.gap() <= tol_scaled;
    finish(pool, best, iterations, converged)
}

fn finish(
    pool: &ExperimentPool,
    best: Incumbent,
    iterations: usize,
    converged: bool,
) -> Result<DesignSolution> {
    let gap = best.gap();
    let weights = DesignWeights::normalized(best.mu)?;
    let objective = spectral::lambda_min(&weighted_gram(pool, weights.as_slice()))?;
    Ok(DesignSolution {
        weights,
        objective,
        certificate_gap: (gap * pool.max_sq_norm()).max(0.0),
        iterations,
        converged,
    })
}

/// Best primal weights and best dual bound seen so far (scaled pool).
struct Incumbent {
    mu: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl Incumbent {
    fn new(dual: &Dual, mu: Vec<f64>, v: &[f64]) -> Result<Self> {
        let lower = dual.lambda_min(&mu)?;
        Ok(Incumbent {
            mu,
            lower,
            upper: dual.max_quad(v),
        })
    }

    fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    fn offer(&mut self, dual: &Dual, v: &[f64], t: f64) -> Result<()> {
        // tr V = 1 holds up to rounding; renormalize so the bound is exact.
        let trace: f64 = dual.diag_index.iter().map(|&i| v[i]).sum();
        self.upper = self.upper.min(dual.max_quad(v) / trace);
        let mu: Vec<f64> = (0..dual.count)
            .map(|k| 1.0 / (t - dual.quad(k, v)))
            .collect();
        if !mu.iter().all(|m| m.is_finite() && *m > 0.0) {
            return Ok(());
        }
        // Inactive experiments keep a residual weight of order 1/τ; dropping
        // it usually tightens the primal bound considerably.
        let top = mu.iter().cloned().fold(0.0, f64::max);
        let trimmed: Vec<f64> = mu
            .iter()
            .map(|&m| if m < TRIM_RTOL * top { 0.0 } else { m })
            .collect();
        for cand in [mu, trimmed] {
            let lower = dual.lambda_min(&cand)?;
            if lower > self.lower {
                self.lower = lower;
                self.mu = cand;
            }
        }
        Ok(())
    }
}

/// The dual problem over `v = svec(V)`, where off-diagonal entries carry a
/// `√2` so that `⟨A, B⟩_F = svec(A)·svec(B)`.
struct Dual {
    count: usize,
    dim: usize,
    r: usize,
    /// `svec(x_k x_kᵀ)` for the pool scaled to `max ‖x‖² = 1`.
    p: Vec<f64>,
    xs: Vec<f64>,
    diag_index: Vec<usize>,
    /// `(i, j)` for each svec slot, `i ≤ j`.
    slots: Vec<(usize, usize)>,
}

impl Dual {
    fn new(pool: &ExperimentPool) -> Self {
        let (count, dim) = (pool.len(), pool.dim());
        let c = 1.0 / pool.max_sq_norm().sqrt();
        let xs: Vec<f64> = pool.as_flat().iter().map(|v| c * v).collect();
        let mut slots = Vec::new();
        let mut diag_index = vec![0; dim];
        for i in 0..dim {
            diag_index[i] = slots.len();
            slots.push((i, i));
            for j in (i + 1)..dim {
                slots.push((i, j));
            }
        }
        let r = slots.len();
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut p = vec![0.0; count * r];
        for k in 0..count {
            let x = &xs[k * dim..(k + 1) * dim];
            for (a, &(i, j)) in slots.iter().enumerate() {
                p[k * r + a] = if i == j {
                    x[i] * x[i]
                } else {
                    sqrt2 * x[i] * x[j]
                };
            }
        }
        Dual {
            count,
            dim,
            r,
            p,
            xs,
            diag_index,
            slots,
        }
    }

    fn quad(&self, k: usize, v: &[f64]) -> f64 {
        linalg::dot(&self.p[k * self.r..(k + 1) * self.r], v)
    }

    fn max_quad(&self, v: &[f64]) -> f64 {
        (0..self.count)
            .map(|k| self.quad(k, v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn lambda_min(&self, mu: &[f64]) -> Result<f64> {
        let sum: f64 = mu.iter().sum();
        let mut m = spectral::SymMatrix::zeros(self.dim);
        for (k, &w) in mu.iter().enumerate() {
            m.add_outer(&self.xs[k * self.dim..(k + 1) * self.dim], w / sum);
        }
        spectral::lambda_min(&m)
    }

    fn unpack(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = vec![0.0; d * d];
        for (a, &(i, j)) in self.slots.iter().enumerate() {
            if i == j {
                m[i * d + i] = v[a];
            } else {
                m[i * d + j] = v[a] * inv_sqrt2;
                m[j * d + i] = v[a] * inv_sqrt2;
            }
        }
        m
    }

    /// `(log det V, V⁻¹)`, or `None` unless `V ≻ 0`.
    fn log_det_inverse(&self, v: &[f64]) -> Option<(f64, Vec<f64>)> {
        let d = self.dim;
        let m = self.unpack(v);
        let mut g = m.clone();
        if !cholesky_in_place(&mut g, d) {
            return None;
        }
        let log_det = 2.0 * (0..d).map(|i| g[i * d + i].ln()).sum::<f64>();
        Some((log_det, linalg::spd_inverse(&m, d)?))
    }

    fn barrier(&self, v: &[f64], t: f64, tau: f64) -> Option<f64> {
        let mut acc = tau * t;
        for k in 0..self.count {
            let slack = t - self.quad(k, v);
            if !(slack > 0.0) {
                return None;
            }
            acc -= slack.ln();
        }
        let (log_det, _) = self.log_det_inverse(v)?;
        Some(acc - log_det)
    }

    /// One damped, trace-preserving Newton step. Returns half the squared
    /// Newton decrement, or `None` when the step cannot be computed.
    fn newton_step(&self, v: &mut [f64], t: &mut f64, tau: f64) -> Option<f64> {
        let (d, r) = (self.dim, self.r);
        let n = r + 1;
        let (_, w) = self.log_det_inverse(v)?;
        let sqrt2 = std::f64::consts::SQRT_2;
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        for k in 0..self.count {
            let pk = &self.p[k * r..(k + 1) * r];
            let inv = 1.0 / (*t - linalg::dot(pk, v));
            let inv2 = inv * inv;
            for a in 0..r {
                grad[a] += pk[a] * inv;
                let pa = pk[a] * inv2;
                if pa == 0.0 {
                    continue;
                }
                for b in a..r {
                    hess[a * n + b] += pa * pk[b];
                }
                hess[a * n + r] -= pa;
            }
            grad[r] -= inv;
            hess[r * n + r] += inv2;
        }
        grad[r] += tau;

        // −log det V: gradient −svec(W), Hessian E ↦ svec(W E W).
        // W is symmetric, so its rows are its columns.
        let mut block = vec![0.0; d * d];
        for (b, &(k, l)) in self.slots.iter().enumerate() {
            let wk = &w[k * d..(k + 1) * d];
            let wl = &w[l * d..(l + 1) * d];
            for i in 0..d {
                for j in 0..d {
                    block[i * d + j] = if k == l {
                        wk[i] * wk[j]
                    } else {
                        inv_sqrt2 * (wk[i] * wl[j] + wl[i] * wk[j])
                    };
                }
            }
            for (a, &(i, j)) in self.slots.iter().enumerate().skip(b) {
                let e = if i == j {
                    block[i * d + i]
                } else {
                    sqrt2 * block[i * d + j]
                };
                hess[b * n + a] += e;
            }
            grad[b] -= if k == l {
                w[k * d + k]
            } else {
                sqrt2 * w[k * d + l]
            };
        }
        for a in 0..n {
            for b in 0..a {
                hess[a * n + b] = hess[b * n + a];
            }
        }
        // Eliminate tr V = const: the last diagonal slot absorbs the others.
        // Free coordinates are every slot except `last`, plus t.
        let last = self.diag_index[d - 1];
        let free: Vec<usize> = (0..n).filter(|&a| a != last).collect();
        let is_diag = |a: usize| a < r && self.slots[a].0 == self.slots[a].1;
        let m = free.len();
        let mut hr = vec![0.0; m * m];
        let mut gr = vec![0.0; m];
        for (i, &a) in free.iter().enumerate() {
            let da = if is_diag(a) { 1.0 } else { 0.0 };
            gr[i] = grad[a] - da * grad[last];
            for (j, &b) in free.iter().enumerate().skip(i) {
                let db = if is_diag(b) { 1.0 } else { 0.0 };
                let h = hess[a * n + b] - da * hess[last * n + b] - db * hess[a * n + last]
                    + da * db * hess[last * n + last];
                hr[i * m + j] = h;
                hr[j * m + i] = h;
            }
        }
        if !cholesky_in_place(&mut hr, m) {
            return None;
        }
        let mut y = gr.clone();
        cholesky_solve(&hr, m, &mut y);
        let mut step = vec![0.0; n];
        for (i, &a) in free.iter().enumerate() {
            step[a] = -y[i];
            if is_diag(a) {
                step[last] += y[i];
            }
        }
        let slope = linalg::dot(&grad, &step);
        let decrement = -0.5 * slope;
        if !(decrement > 0.0) {
            return Some(0.0);
        }

        let base = self.barrier(v, *t, tau)?;
        let mut alpha = 1.0;
        let mut trial = vec![0.0; r];
        for _ in 0..MAX_BACKTRACKS {
            for i in 0..r {
                trial[i] = v[i] + alpha * step[i];
            }
            let t_new = *t + alpha * step[r];
            if let Some(val) = self.barrier(&trial, t_new, tau) {
                if val <= base + 0.25 * alpha * slope {
                    v.copy_from_slice(&trial);
                    *t = t_new;
                    return Some(decrement);
                }
            }
            alpha *= 0.5;
        }
        None
    }
}
