//! Command layer behind the CLI: JSON configs in, CSV or JSON text out.
//!
//! Every random stream is derived from the config's master `seed` with
//! [`derive_seed`](crate::rng::derive_seed) and a path naming the stream and
//! its grid cell by value, e.g. `[DRAWS, seed_index, n, strategy]`. Adding
//! seeds or grid points therefore leaves the existing rows untouched.

mod experiments;
mod tools;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bandit::soare_instance;
use crate::design::{self, DesignWeights, ExperimentPool};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

pub use experiments::{cmd_exp_bai, cmd_exp_e, ExpBaiConfig, ExpEConfig, ExpEMode};
pub use tools::{
    cmd_bounds, cmd_sample, cmd_solve, cmd_validate, validate_theorem, BoundsRequest, SampleConfig,
    SolveConfig, Theorem, ValidateConfig, ValidationReport,
};

/// Stream tags used as the first element of seed paths.
pub(crate) mod stream {
    pub const POOL: u64 = 0;
    pub const DRAWS: u64 = 1;
    pub const GREEDY: u64 = 2;
    pub const BAI: u64 = 3;
    pub const TRIALS: u64 = 4;
}

/// CSV header of `exp-e`.
pub const EXP_E_HEADER: &str = "experiment,seed,strategy,d,K,n,metric,value,censored";
/// CSV header of `exp-bai`.
pub const EXP_BAI_HEADER: &str =
    "experiment,seed,strategy,d,K,samples_used,identified_arm,stopped,correct";

/// Subcommands of the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sample,
    Bounds,
    Validate,
    ExpE,
    ExpBai,
}

impl Command {
    fn uses_seed(self) -> bool {
        !matches!(self, Command::Bounds)
    }
}

/// Parse `config_json`, apply a seed override and run `command`.
pub fn run_command(command: Command, config_json: &str, seed: Option<u64>) -> Result<String> {
    let mut value: serde_json::Value = serde_json::from_str(config_json)
        .map_err(|e| Error::Usage(format!("config is not valid JSON: {e}")))?;
    if let Some(seed) = seed {
        if command.uses_seed() {
            let obj = value
                .as_object_mut()
                .ok_or_else(|| Error::Usage("config must be a JSON object".into()))?;
            obj.insert("seed".into(), seed.into());
        }
    }
    match command {
        Command::Solve => cmd_solve(&parse(value)?),
        Command::Sample => cmd_sample(&parse(value)?),
        Command::Bounds => cmd_bounds(&parse(value)?),
        Command::Validate => cmd_validate(&parse(value)?),
        Command::ExpE => cmd_exp_e(&parse(value)?),
        Command::ExpBai => cmd_exp_bai(&parse(value)?),
    }
}

fn parse<T: DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Usage(format!("invalid config: {e}")))
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

/// `K` rows of i.i.d. standard normal coordinates, drawn row by row.
pub fn gaussian_pool(k: usize, d: usize, seed: u64) -> Result<ExperimentPool> {
    if k == 0 || d == 0 {
        return Err(crate::error::invalid(
            "gaussian pool needs K >= 1 and d >= 1",
        ));
    }
    let mut rng = rng_from_seed(seed);
    let data: Vec<f64> = (0..k * d).map(|_| rng.sample(StandardNormal)).collect();
    ExperimentPool::from_flat(k, d, data)
}

/// Where a command's experiment pool comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PoolSpec {
    /// `k` standard normal rows in `R^d`; requires `k >= d`.
    Gaussian {
        k: usize,
        d: usize,
    },
    Canonical {
        d: usize,
    },
    Explicit {
        rows: Vec<Vec<f64>>,
    },
    /// Arms of the best-arm instance with angle `omega`.
    Soare {
        d: usize,
        omega: f64,
    },
}

impl PoolSpec {
    /// Build the pool; Gaussian pools draw from `derive_seed(seed, [POOL])`.
    pub fn build(&self, seed: u64) -> Result<ExperimentPool> {
        match self {
            PoolSpec::Gaussian { k, d } => {
                if k < d {
                    return Err(usage(format!(
                        "gaussian pool needs K >= d, got K = {k}, d = {d}"
                    )));
                }
                gaussian_pool(*k, *d, derive_seed(seed, &[stream::POOL]))
            }
            PoolSpec::Canonical { d } => ExperimentPool::canonical(*d),
            PoolSpec::Explicit { rows } => ExperimentPool::new(rows.clone()),
            PoolSpec::Soare { d, omega } => Ok(soare_instance(*d, *omega)?.arms().clone()),
        }
    }
}

/// Relaxed design used by a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignChoice {
    E,
    G,
    Uniform,
}

/// Solver tolerances. The E tolerance is relative to `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "default_e_rtol")]
    pub e_rtol: f64,
    #[serde(default = "default_g_tol")]
    pub g_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_e_rtol() -> f64 {
    1e-6
}

fn default_g_tol() -> f64 {
    1e-6
}

fn default_max_iter() -> usize {
    1_000_000
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            e_rtol: default_e_rtol(),
            g_tol: default_g_tol(),
            max_iter: default_max_iter(),
        }
    }
}

impl DesignChoice {
    pub fn solve(self, pool: &ExperimentPool, settings: &SolverSettings) -> Result<DesignWeights> {
        match self {
            DesignChoice::E => {
                let tol = settings.e_rtol * pool.max_sq_norm();
                Ok(design::solve_e_relaxed(pool, tol, settings.max_iter)?
                    .require_converged()?
                    .weights)
            }
            DesignChoice::G => {
                Ok(
                    design::solve_g_relaxed(pool, settings.g_tol, settings.max_iter)?
                        .require_converged()?
                        .weights,
                )
            }
            DesignChoice::Uniform => design::uniform_design(pool.len()),
        }
    }
}

/// Mean and sample standard deviation; `None` for an empty slice.
pub(crate) fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt()))
}
