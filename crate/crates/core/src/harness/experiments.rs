//! Campaigns: E-design comparison and best-arm identification.
//!
//! Each campaign emits one CSV row per (grid point, strategy, seed index),
//! sorted in that order, followed by summary rows whose `seed` field is
//! `all` (exp-e) or `mean` (exp-bai).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    gaussian_pool, mean_std, stream, usage, DesignChoice, SolverSettings, EXP_BAI_HEADER,
    EXP_E_HEADER,
};
use crate::bandit::{run_bai, soare_instance, Strategy, DEFAULT_MAX_ROUNDS};
use crate::design::{greedy_e_sequence, ExperimentPool};
use crate::error::Result;
use crate::exec::Execution;
use crate::rng::{derive_seed, rng_for};
use crate::sampling::{draw_counts, realized_info, SampleCounts};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpEMode {
    /// Sweep the number of selections at fixed `d`.
    #[default]
    N,
    /// Sweep the dimension at fixed `n`.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EStrategy {
    RandomizedE,
    GreedyE,
    Uniform,
}

impl EStrategy {
    fn id(self) -> u64 {
        self as u64
    }

    fn name(self) -> &'static str {
        match self {
            EStrategy::RandomizedE => "randomized_e",
            EStrategy::GreedyE => "greedy_e",
            EStrategy::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EPool {
    #[default]
    Gaussian,
    /// Canonical basis of `R^d`; `k` is ignored.
    Canonical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpEConfig {
    #[serde(default)]
    pub mode: ExpEMode,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Dimension for the `n` sweep.
    #[serde(default = "default_d")]
    pub d: usize,
    /// Selections for the `d` sweep.
    #[serde(default = "default_n")]
    pub n: u64,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<u64>,
    #[serde(default = "default_d_grid")]
    pub d_grid: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default = "default_e_strategies")]
    pub strategies: Vec<EStrategy>,
    #[serde(default)]
    pub pool: EPool,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub execution: Execution,
}

fn default_k() -> usize {
    500
}

fn default_d() -> usize {
    10
}

fn default_n() -> u64 {
    500
}

fn default_n_grid() -> Vec<u64> {
    vec![10, 20, 50, 100, 200, 500, 1000]
}

fn default_d_grid() -> Vec<usize> {
    (2..=20).collect()
}

fn default_seeds() -> u64 {
    100
}

fn default_e_strategies() -> Vec<EStrategy> {
    vec![
        EStrategy::RandomizedE,
        EStrategy::GreedyE,
        EStrategy::Uniform,
    ]
}

struct ECell {
    n: u64,
    d: usize,
    k: usize,
    strategy: EStrategy,
    seed_index: u64,
    value: Option<f64>,
}

fn lambda_min_of(pool: &ExperimentPool, counts: &SampleCounts) -> Option<f64> {
    let s = realized_info(pool, counts).ok()?;
    spectral::lambda_min(&s).ok().map(|v| v.max(0.0))
}

/// All cells of one (seed index, dimension) pool.
fn run_e_unit(cfg: &ExpEConfig, seed_index: u64, d: usize, n_grid: &[u64]) -> Result<Vec<ECell>> {
    let pool = match cfg.pool {
        EPool::Gaussian => gaussian_pool(
            cfg.k,
            d,
            derive_seed(cfg.seed, &[stream::POOL, seed_index, d as u64]),
        )?,
        EPool::Canonical => ExperimentPool::canonical(d)?,
    };
    let k = pool.len();
    let max_n = n_grid.iter().copied().max().unwrap_or(0);
    let relaxed = if cfg.strategies.contains(&EStrategy::RandomizedE) {
        DesignChoice::E.solve(&pool, &cfg.solver).ok()
    } else {
        None
    };
    let greedy = if cfg.strategies.contains(&EStrategy::GreedyE) && max_n > 0 {
        let mut rng = rng_for(cfg.seed, &[stream::GREEDY, seed_index, d as u64]);
        Some(greedy_e_sequence(&pool, max_n as usize, &mut rng)?)
    } else {
        None
    };
    let uniform = crate::design::uniform_design(k)?;
    let mut cells = Vec::new();
    for &n in n_grid {
        for &strategy in &cfg.strategies {
            let mut rng = rng_for(
                cfg.seed,
                &[stream::DRAWS, seed_index, d as u64, n, strategy.id()],
            );
            let value = match strategy {
                EStrategy::RandomizedE => relaxed
                    .as_ref()
                    .and_then(|mu| lambda_min_of(&pool, &draw_counts(mu, n, &mut rng))),
                EStrategy::GreedyE => {
                    let seq = greedy.as_ref().expect("greedy sequence computed");
                    lambda_min_of(&pool, &SampleCounts::from_indices(k, &seq[..n as usize]))
                }
                EStrategy::Uniform => lambda_min_of(&pool, &draw_counts(&uniform, n, &mut rng)),
            };
            cells.push(ECell {
                n,
                d,
                k,
                strategy,
                seed_index,
                value,
            });
        }
    }
    Ok(cells)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Smallest eigenvalue of the realized information matrix per strategy.
pub fn cmd_exp_e(cfg: &ExpEConfig) -> Result<String> {
    if cfg.seeds == 0 || cfg.strategies.is_empty() {
        return Err(usage("exp-e needs at least one seed and one strategy"));
    }
    let (experiment, dims, n_grid): (&str, Vec<usize>, Vec<u64>) = match cfg.mode {
        ExpEMode::N => ("exp_e_n", vec![cfg.d], cfg.n_grid.clone()),
        ExpEMode::D => ("exp_e_d", cfg.d_grid.clone(), vec![cfg.n]),
    };
    if dims.is_empty() || n_grid.is_empty() || dims.contains(&0) || n_grid.contains(&0) {
        return Err(usage("grids must be non-empty and positive"));
    }
    if cfg.pool == EPool::Gaussian && dims.iter().any(|&d| cfg.k < d) {
        return Err(usage("gaussian pools need K >= d"));
    }
    let units: Vec<(u64, usize)> = dims
        .iter()
        .flat_map(|&d| (0..cfg.seeds).map(move |s| (s, d)))
        .collect();
    let results = cfg
        .execution
        .map_slice(&units, |&(s, d)| run_e_unit(cfg, s, d, &n_grid));
    let mut cells = Vec::new();
    for r in results {
        cells.extend(r?);
    }
    let grid_key = |c: &ECell| match cfg.mode {
        ExpEMode::N => c.n,
        ExpEMode::D => c.d as u64,
    };
    cells.sort_by_key(|c| (grid_key(c), c.strategy, c.seed_index));

    let mut out = format!("{EXP_E_HEADER}\n");
    for c in &cells {
        let _ = writeln!(
            out,
            "{experiment},{},{},{},{},{},lambda_min,{},{}",
            c.seed_index,
            c.strategy.name(),
            c.d,
            c.k,
            c.n,
            fmt_opt(c.value),
            c.value.is_none()
        );
    }
    for group in cells.chunk_by(|a, b| grid_key(a) == grid_key(b) && a.strategy == b.strategy) {
        let c = &group[0];
        let values: Vec<f64> = group.iter().filter_map(|c| c.value).collect();
        let censored = (group.len() - values.len()) as f64 / group.len() as f64;
        let stats = mean_std(&values);
        let prefix = format!(
            "{experiment},all,{},{},{},{}",
            c.strategy.name(),
            c.d,
            c.k,
            c.n
        );
        let _ = writeln!(
            out,
            "{prefix},lambda_min_mean,{},false",
            fmt_opt(stats.map(|s| s.0))
        );
        let _ = writeln!(
            out,
            "{prefix},lambda_min_std,{},false",
            fmt_opt(stats.map(|s| s.1))
        );
        let _ = writeln!(out, "{prefix},censored_fraction,{censored},false");
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaiStrategy {
    RandomizedG,
    GreedyG,
    Uniform,
}

impl BaiStrategy {
    fn id(self) -> u64 {
        self as u64
    }

    fn name(self) -> &'static str {
        match self {
            BaiStrategy::RandomizedG => "randomized_g",
            BaiStrategy::GreedyG => "greedy_g",
            BaiStrategy::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpBaiConfig {
    #[serde(default = "default_bai_grid")]
    pub d_grid: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_bai_strategies")]
    pub strategies: Vec<BaiStrategy>,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u64,
    #[serde(default = "default_noise")]
    pub noise_std: f64,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub execution: Execution,
}

fn default_bai_grid() -> Vec<usize> {
    (2..=10).collect()
}

fn default_omega() -> f64 {
    0.1
}

fn default_delta() -> f64 {
    0.05
}

fn default_bai_strategies() -> Vec<BaiStrategy> {
    vec![BaiStrategy::RandomizedG, BaiStrategy::GreedyG]
}

fn default_max_rounds() -> u64 {
    DEFAULT_MAX_ROUNDS
}

fn default_noise() -> f64 {
    1.0
}

struct BaiCell {
    d: usize,
    k: usize,
    strategy: BaiStrategy,
    seed_index: u64,
    samples_used: u64,
    identified_arm: Option<usize>,
    stopped: bool,
    correct: bool,
}

/// Samples to stop and identified arm on the best-arm instance.
pub fn cmd_exp_bai(cfg: &ExpBaiConfig) -> Result<String> {
    if cfg.seeds == 0 || cfg.strategies.is_empty() || cfg.d_grid.is_empty() {
        return Err(usage("exp-bai needs seeds, strategies and a d-grid"));
    }
    let mut plans = Vec::new();
    for &d in &cfg.d_grid {
        let inst = soare_instance(d, cfg.omega)
            .map_err(|e| usage(e.to_string()))?
            .with_noise_std(cfg.noise_std)?;
        for &strategy in &cfg.strategies {
            let rule = match strategy {
                BaiStrategy::RandomizedG => {
                    Strategy::randomized_g(&inst, cfg.solver.g_tol, cfg.solver.max_iter)?
                }
                BaiStrategy::GreedyG => Strategy::GreedyG,
                BaiStrategy::Uniform => Strategy::Uniform,
            };
            plans.push((d, strategy, inst.clone(), rule));
        }
    }
    let units: Vec<(usize, u64)> = (0..plans.len())
        .flat_map(|p| (0..cfg.seeds).map(move |s| (p, s)))
        .collect();
    let results = cfg
        .execution
        .map_slice(&units, |&(p, s)| -> Result<BaiCell> {
            let (d, strategy, inst, rule) = &plans[p];
            let mut rng = rng_for(cfg.seed, &[stream::BAI, *d as u64, s, strategy.id()]);
            let out = run_bai(inst, rule, cfg.delta, cfg.max_rounds, &mut rng)?;
            Ok(BaiCell {
                d: *d,
                k: inst.arms().len(),
                strategy: *strategy,
                seed_index: s,
                samples_used: out.samples_used,
                identified_arm: out.identified_arm,
                stopped: out.stopped,
                correct: out.identified_arm.is_some() && out.identified_arm == inst.best_arm(),
            })
        });
    let mut cells = results.into_iter().collect::<Result<Vec<_>>>()?;
    cells.sort_by_key(|c| (c.d, c.strategy, c.seed_index));

    let mut out = format!("{EXP_BAI_HEADER}\n");
    for c in &cells {
        let _ = writeln!(
            out,
            "exp_bai,{},{},{},{},{},{},{},{}",
            c.seed_index,
            c.strategy.name(),
            c.d,
            c.k,
            c.samples_used,
            c.identified_arm.map(|a| a.to_string()).unwrap_or_default(),
            c.stopped,
            c.correct
        );
    }
    // Summary rows carry the mean sample count, stop rate and correct rate.
    for group in cells.chunk_by(|a, b| a.d == b.d && a.strategy == b.strategy) {
        let c = &group[0];
        let n = group.len() as f64;
        let samples: Vec<f64> = group.iter().map(|c| c.samples_used as f64).collect();
        let (mean, _) = mean_std(&samples).expect("non-empty group");
        let stop_rate = group.iter().filter(|c| c.stopped).count() as f64 / n;
        let correct_rate = group.iter().filter(|c| c.correct).count() as f64 / n;
        let _ = writeln!(
            out,
            "exp_bai,mean,{},{},{},{mean},,{stop_rate},{correct_rate}",
            c.strategy.name(),
            c.d,
            c.k
        );
    }
    Ok(out)
}
