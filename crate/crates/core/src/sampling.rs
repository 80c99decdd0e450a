//! I.i.d. realizations of a relaxed design and their scores.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::design::{weighted_gram, DesignWeights, ExperimentPool, SINGULAR_RTOL};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::rng::{rng_from_seed, split};
use crate::spectral::{self, SymMatrix};

/// How many times each experiment was chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    counts: Vec<u64>,
    n: u64,
}

impl SampleCounts {
    pub fn new(counts: Vec<u64>) -> Self {
        let n = counts.iter().sum();
        SampleCounts { counts, n }
    }

    pub fn zeros(len: usize) -> Self {
        SampleCounts {
            counts: vec![0; len],
            n: 0,
        }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut c = Self::zeros(len);
        indices.iter().for_each(|&k| c.increment(k));
        c
    }

    pub fn increment(&mut self, k: usize) {
        self.counts[k] += 1;
        self.n += 1;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub(crate) fn as_weights(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// Inverse-CDF sampler over the indices of a design.
#[derive(Debug, Clone)]
pub struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    pub fn new(mu: &DesignWeights) -> Self {
        let w = mu.as_slice();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = w
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        // Rounding must never let a draw fall past the last supported index.
        let last = w
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("weights sum to one");
        cumulative[last..]
            .iter_mut()
            .for_each(|c| *c = f64::INFINITY);
        Categorical { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// Counts of `n` i.i.d. draws from `mu`.
pub fn draw_counts<R: Rng + ?Sized>(mu: &DesignWeights, n: u64, rng: &mut R) -> SampleCounts {
    let sampler = Categorical::new(mu);
    let mut counts = SampleCounts::zeros(mu.len());
    for _ in 0..n {
        counts.increment(sampler.sample(rng));
    }
    counts
}

/// `S_n = Σ_k n_k x_k x_kᵀ`.
pub fn realized_info(pool: &ExperimentPool, counts: &SampleCounts) -> Result<SymMatrix> {
    if counts.len() != pool.len() {
        return Err(invalid(format!(
            "counts have {} entries for a pool of {} experiments",
            counts.len(),
            pool.len()
        )));
    }
    Ok(weighted_gram(pool, &counts.as_weights()))
}

/// Realized-to-optimal criterion ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizedScores {
    /// `λ_min(M(μ_ref))·n / λ_min(S_n)`.
    pub ratio_e: f64,
    /// `crit_G(S_n)·n / d`.
    pub ratio_g: f64,
}

/// A sampled design together with its information matrix and scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedDesign {
    pub counts: SampleCounts,
    pub s_n: SymMatrix,
    pub ratio_e: Option<f64>,
    pub ratio_g: Option<f64>,
}

/// Scores realized designs against a fixed reference design.
#[derive(Debug, Clone)]
pub struct Scorer<'a> {
    pool: &'a ExperimentPool,
    ref_lambda_min: f64,
}

impl<'a> Scorer<'a> {
    pub fn new(pool: &'a ExperimentPool, mu_ref: &DesignWeights) -> Result<Self> {
        let m = crate::design::info_matrix(pool, mu_ref)?;
        Ok(Scorer {
            pool,
            ref_lambda_min: spectral::lambda_min(&m)?,
        })
    }

    pub fn score_matrix(&self, s_n: &SymMatrix, n: u64) -> Result<RealizedScores> {
        let sp = spectral::eigh(s_n)?;
        let (lmin, lmax) = (sp.min(), sp.max());
        if !(lmin > SINGULAR_RTOL * lmax.abs()) {
            return Err(Error::Singular { lambda_min: lmin });
        }
        let inv = sp.compose(&sp.eigenvalues.iter().map(|l| 1.0 / l).collect::<Vec<_>>());
        let crit = crate::design::max_leverage(self.pool, &inv);
        let n = n as f64;
        Ok(RealizedScores {
            ratio_e: self.ref_lambda_min * n / lmin,
            ratio_g: crit * n / self.pool.dim() as f64,
        })
    }

    pub fn score(&self, counts: &SampleCounts) -> Result<RealizedScores> {
        let s_n = realized_info(self.pool, counts)?;
        self.score_matrix(&s_n, counts.n())
    }
}

/// Ratios of a realized design against `mu_ref`; singular `S_n` is an error.
pub fn score_realized(
    pool: &ExperimentPool,
    counts: &SampleCounts,
    mu_ref: &DesignWeights,
) -> Result<RealizedScores> {
    Scorer::new(pool, mu_ref)?.score(counts)
}

/// Draw one design and score it; singular draws carry `None` ratios.
pub fn realize<R: Rng + ?Sized>(
    pool: &ExperimentPool,
    mu: &DesignWeights,
    n: u64,
    rng: &mut R,
) -> Result<RealizedDesign> {
    let scorer = Scorer::new(pool, mu)?;
    let counts = draw_counts(mu, n, rng);
    let s_n = realized_info(pool, &counts)?;
    let scores = scorer.score_matrix(&s_n, n).ok();
    Ok(RealizedDesign {
        counts,
        s_n,
        ratio_e: scores.map(|s| s.ratio_e),
        ratio_g: scores.map(|s| s.ratio_g),
    })
}

/// One replicate of [`replicate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub ratio_e: Option<f64>,
    pub ratio_g: Option<f64>,
    pub censored: bool,
}

/// Aggregate over uncensored trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub trials: u64,
    pub censored: u64,
    pub censored_fraction: f64,
    pub mean_ratio_e: Option<f64>,
    pub mean_ratio_g: Option<f64>,
    pub median_ratio_e: Option<f64>,
    pub median_ratio_g: Option<f64>,
}

/// `trials` independent designs of size `n`; trial `t` is seeded with
/// `split(master_seed, t)` so results do not depend on scheduling.
pub fn replicate(
    pool: &ExperimentPool,
    mu: &DesignWeights,
    n: u64,
    trials: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<Vec<TrialOutcome>> {
    if trials == 0 {
        return Err(invalid("replicate needs at least one trial"));
    }
    let scorer = Scorer::new(pool, mu)?;
    let sampler = Categorical::new(mu);
    exec.map_indices(trials as usize, |t| {
        let mut rng = rng_from_seed(split(master_seed, t as u64));
        let mut counts = SampleCounts::zeros(mu.len());
        for _ in 0..n {
            counts.increment(sampler.sample(&mut rng));
        }
        let scores = scorer.score(&counts).ok();
        Ok(TrialOutcome {
            trial: t as u64,
            ratio_e: scores.map(|s| s.ratio_e),
            ratio_g: scores.map(|s| s.ratio_g),
            censored: scores.is_none(),
        })
    })
    .into_iter()
    .collect()
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

pub fn summarize(outcomes: &[TrialOutcome]) -> ReplicateSummary {
    let trials = outcomes.len() as u64;
    let censored = outcomes.iter().filter(|o| o.censored).count() as u64;
    let e: Vec<f64> = outcomes.iter().filter_map(|o| o.ratio_e).collect();
    let g: Vec<f64> = outcomes.iter().filter_map(|o| o.ratio_g).collect();
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    ReplicateSummary {
        trials,
        censored,
        censored_fraction: if trials == 0 {
            0.0
        } else {
            censored as f64 / trials as f64
        },
        mean_ratio_e: mean(&e),
        mean_ratio_g: mean(&g),
        median_ratio_e: median(e),
        median_ratio_g: median(g),
    }
}
