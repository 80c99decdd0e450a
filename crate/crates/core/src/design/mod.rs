//! Experiment pools, the E and G criteria, relaxed solvers and greedy
//! integer baselines.
//!
//! Criteria are reported for the unit-noise, unnormalized information
//! matrix. The `σ²/n` factor of an actual covariance is left to callers:
//! it does not move any argmin.

mod e_optimal;
mod g_optimal;
mod greedy;
#[cfg(test)]
pub(crate) mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::spectral::{self, SymMatrix};

pub use e_optimal::solve_e_relaxed;
pub use g_optimal::solve_g_relaxed;
pub use greedy::{greedy_e, greedy_e_sequence, greedy_g, greedy_g_sequence, GreedyE, GreedyG};

/// Relative eigenvalue threshold under which an information matrix is
/// treated as singular by the criteria.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Eigenvalues above `RANK_RTOL · L` count toward the rank.
pub const RANK_RTOL: f64 = 1e-9;

/// The `K` candidate experiments `x_1, …, x_K ∈ R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ExperimentPool {
    dim: usize,
    data: Vec<f64>,
    max_sq_norm: f64,
}

impl ExperimentPool {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("all experiments must have the same dimension"));
        }
        Self::from_flat(rows.len(), dim, rows.concat())
    }

    pub fn from_flat(count: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if count == 0 {
            return Err(invalid("experiment pool is empty"));
        }
        if dim == 0 {
            return Err(invalid("experiments must have dimension at least 1"));
        }
        if data.len() != count * dim {
            return Err(invalid("experiment data length does not match count × dim"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("experiment pool has non-finite coordinates"));
        }
        let max_sq_norm = data
            .chunks(dim)
            .map(|r| linalg::dot(r, r))
            .fold(0.0, f64::max);
        if max_sq_norm == 0.0 {
            return Err(invalid("every experiment is the zero vector"));
        }
        Ok(ExperimentPool {
            dim,
            data,
            max_sq_norm,
        })
    }

    /// `e_1, …, e_d`.
    pub fn canonical(dim: usize) -> Result<Self> {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self::from_flat(dim, dim, data)
    }

    /// Number of experiments `K`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// `L = max_k ‖x_k‖²`.
    pub fn max_sq_norm(&self) -> f64 {
        self.max_sq_norm
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_flat(
            self.len(),
            self.dim,
            self.data.iter().map(|v| c * v).collect(),
        )
    }

    /// Rank of the span, counting eigenvalues of `Σ x_k x_kᵀ` above
    /// `RANK_RTOL · L`.
    pub fn rank(&self) -> usize {
        let mut m = SymMatrix::zeros(self.dim);
        for x in self.rows() {
            m.add_outer(x, 1.0);
        }
        let threshold = RANK_RTOL * self.max_sq_norm;
        spectral::eigh(&m)
            .map(|sp| sp.eigenvalues.iter().filter(|&&l| l > threshold).count())
            .unwrap_or(0)
    }

    pub fn spans(&self) -> bool {
        self.rank() == self.dim
    }

    pub(crate) fn require_spanning(&self) -> Result<()> {
        if self.spans() {
            Ok(())
        } else {
            Err(Error::NonSpanningPool { dim: self.dim })
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for ExperimentPool {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        ExperimentPool::new(rows)
    }
}

impl From<ExperimentPool> for Vec<Vec<f64>> {
    fn from(p: ExperimentPool) -> Self {
        p.to_rows()
    }
}

/// A point of the simplex `Δ_K`: a relaxed design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DesignWeights(Vec<f64>);

impl DesignWeights {
    pub const SUM_TOL: f64 = 1e-9;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("design weights are empty"));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(invalid("design weights must lie in [0, 1]"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(invalid(format!("design weights sum to {sum}, not 1")));
        }
        Ok(DesignWeights(weights))
    }

    /// Normalize nonnegative weights onto the simplex.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(invalid("weights sum to zero"));
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Ok(DesignWeights(weights))
    }

    pub fn one_hot(len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(invalid("one-hot index out of range"));
        }
        let mut w = vec![0.0; len];
        w[index] = 1.0;
        Ok(DesignWeights(w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for DesignWeights {
    type Error = Error;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        DesignWeights::new(w)
    }
}

impl From<DesignWeights> for Vec<f64> {
    fn from(w: DesignWeights) -> Self {
        w.0
    }
}

/// Output of a relaxed solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub weights: DesignWeights,
    pub objective: f64,
    /// Upper bound on the distance to the optimum (E) or `crit_G/d − 1` (G).
    pub certificate_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DesignSolution {
    /// Turn an unconverged solution into [`Error::MaxIterExceeded`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::MaxIterExceeded {
                iterations: self.iterations,
                gap: self.certificate_gap,
            })
        }
    }
}

/// `1/K` on every experiment.
pub fn uniform_design(count: usize) -> Result<DesignWeights> {
    if count == 0 {
        return Err(invalid("uniform design needs at least one experiment"));
    }
    Ok(DesignWeights(vec![1.0 / count as f64; count]))
}

/// `M(μ) = Σ_k μ_k x_k x_kᵀ`.
pub fn info_matrix(pool: &ExperimentPool, mu: &DesignWeights) -> Result<SymMatrix> {
    if mu.len() != pool.len() {
        return Err(invalid(format!(
            "design has {} weights for a pool of {} experiments",
            mu.len(),
            pool.len()
        )));
    }
    Ok(weighted_gram(pool, mu.as_slice()))
}

pub(crate) fn weighted_gram(pool: &ExperimentPool, w: &[f64]) -> SymMatrix {
    let mut m = SymMatrix::zeros(pool.dim());
    for (x, &wk) in pool.rows().zip(w) {
        if wk != 0.0 {
            m.add_outer(x, wk);
        }
    }
    m
}

/// E criterion `‖M⁻¹‖ = 1/λ_min(M)`.
pub fn crit_e(m: &SymMatrix) -> Result<f64> {
    let sp = spectral::eigh(m)?;
    let lmin = sp.min();
    if !(lmin > SINGULAR_RTOL * sp.max().abs()) {
        return Err(Error::Singular { lambda_min: lmin });
    }
    Ok(1.0 / lmin)
}

/// G criterion `max_k x_kᵀ M⁻¹ x_k`.
pub fn crit_g(pool: &ExperimentPool, m: &SymMatrix) -> Result<f64> {
    if m.dim() != pool.dim() {
        return Err(invalid("matrix and pool dimensions differ"));
    }
    let inv = spectral::psd_inverse(m, SINGULAR_RTOL)?;
    Ok(max_leverage(pool, &inv))
}

pub(crate) fn max_leverage(pool: &ExperimentPool, inv: &SymMatrix) -> f64 {
    pool.rows()
        .map(|x| inv.quad_form(x))
        .fold(f64::NEG_INFINITY, f64::max)
}
