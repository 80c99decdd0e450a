//! Direct access to the solvers, the sampler and the bound evaluators.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{stream, usage, DesignChoice, PoolSpec, SolverSettings};
use crate::bounds::{self, BernsteinForm, McReport, Side};
use crate::design::{self, DesignWeights, ExperimentPool};
use crate::error::Result;
use crate::exec::Execution;
use crate::rng::{derive_seed, SimRng};
use crate::sampling::{self, Categorical, SampleCounts};
use crate::spectral::{self, SymMatrix};

fn to_json(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub pool: PoolSpec,
    pub design: DesignChoice,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
}

/// Relaxed design of the pool with its objective and certificate.
pub fn cmd_solve(cfg: &SolveConfig) -> Result<String> {
    let pool = cfg.pool.build(cfg.seed)?;
    let sol = match cfg.design {
        DesignChoice::E => design::solve_e_relaxed(
            &pool,
            cfg.solver.e_rtol * pool.max_sq_norm(),
            cfg.solver.max_iter,
        )?,
        DesignChoice::G => design::solve_g_relaxed(&pool, cfg.solver.g_tol, cfg.solver.max_iter)?,
        DesignChoice::Uniform => {
            let weights = design::uniform_design(pool.len())?;
            let m = design::info_matrix(&pool, &weights)?;
            design::DesignSolution {
                objective: spectral::lambda_min(&m)?,
                weights,
                certificate_gap: f64::NAN,
                iterations: 0,
                converged: true,
            }
        }
    };
    Ok(to_json(json!({
        "design": cfg.design,
        "d": pool.dim(),
        "K": pool.len(),
        "L": pool.max_sq_norm(),
        "weights": sol.weights.as_slice(),
        "objective": sol.objective,
        "certificate_gap": sol.certificate_gap.is_finite().then_some(sol.certificate_gap),
        "iterations": sol.iterations,
        "converged": sol.converged,
    })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub pool: PoolSpec,
    pub design: DesignChoice,
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub execution: Execution,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Replicated ratios `f(S_n⁻¹)/f*_n` as CSV: `trial,n,ratio_e,ratio_g,censored`.
pub fn cmd_sample(cfg: &SampleConfig) -> Result<String> {
    let pool = cfg.pool.build(cfg.seed)?;
    let mu = cfg.design.solve(&pool, &cfg.solver)?;
    let master = derive_seed(cfg.seed, &[stream::TRIALS]);
    let outcomes = sampling::replicate(&pool, &mu, cfg.n, cfg.trials, master, cfg.execution)?;
    let mut out = String::from("trial,n,ratio_e,ratio_g,censored\n");
    for o in &outcomes {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            o.trial,
            cfg.n,
            opt(o.ratio_e),
            opt(o.ratio_g),
            o.censored
        );
    }
    Ok(out)
}

fn matrix(rows: &[Vec<f64>]) -> Result<SymMatrix> {
    SymMatrix::from_rows(rows)
}

/// One evaluator call, tagged by `evaluator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "evaluator", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundsRequest {
    HoeffdingBound {
        side: Side,
        eps: f64,
        n: u64,
        d: usize,
        #[serde(alias = "L")]
        l: f64,
        anchor: f64,
    },
    HoeffdingSimplified {
        eps: f64,
        n: u64,
        d: usize,
        #[serde(alias = "L")]
        l: f64,
        lam_min_ex1: f64,
    },
    BennettBound {
        t: f64,
        n: u64,
        d: usize,
        #[serde(alias = "L")]
        l: f64,
        sigma2: f64,
    },
    BennettPrecision {
        delta: f64,
        n: u64,
        d: usize,
        #[serde(alias = "L")]
        l: f64,
        sigma2: f64,
    },
    BernsteinTail {
        t: f64,
        n: u64,
        d: usize,
        sigma2: f64,
        c: f64,
    },
    HoeffdingIntdim {
        eps: f64,
        e_sn: Vec<Vec<f64>>,
        #[serde(alias = "L")]
        l: f64,
    },
    HoeffdingRefined {
        side: Side,
        eps: f64,
        e_sn: Vec<Vec<f64>>,
        e_x1_anchor: f64,
        n: u64,
        #[serde(alias = "L")]
        l: f64,
    },
    BernsteinRefined {
        t: f64,
        n: u64,
        v: Vec<Vec<f64>>,
        #[serde(alias = "L")]
        l: f64,
        #[serde(default)]
        form: BernsteinForm,
    },
    GuaranteeE {
        n: u64,
        delta: f64,
        d: usize,
        #[serde(alias = "L")]
        l: f64,
        norm_minv: f64,
    },
    GuaranteeGFull {
        n: u64,
        delta: f64,
        d: usize,
        #[serde(alias = "L")]
        l: f64,
        m_mu: Vec<Vec<f64>>,
        sigma2_thm: f64,
    },
    GuaranteeGRefined {
        n: u64,
        delta: f64,
        d: usize,
        #[serde(alias = "L")]
        l: f64,
        m_mu: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
    },
}

impl BoundsRequest {
    fn name(&self) -> &'static str {
        match self {
            BoundsRequest::HoeffdingBound { .. } => "hoeffding_bound",
            BoundsRequest::HoeffdingSimplified { .. } => "hoeffding_simplified",
            BoundsRequest::BennettBound { .. } => "bennett_bound",
            BoundsRequest::BennettPrecision { .. } => "bennett_precision",
            BoundsRequest::BernsteinTail { .. } => "bernstein_tail",
            BoundsRequest::HoeffdingIntdim { .. } => "hoeffding_intdim",
            BoundsRequest::HoeffdingRefined { .. } => "hoeffding_refined",
            BoundsRequest::BernsteinRefined { .. } => "bernstein_refined",
            BoundsRequest::GuaranteeE { .. } => "guarantee_e",
            BoundsRequest::GuaranteeGFull { .. } => "guarantee_g_full",
            BoundsRequest::GuaranteeGRefined { .. } => "guarantee_g_refined",
        }
    }
}

/// Evaluate one bound and report it as JSON `{"evaluator", "result"}`.
pub fn cmd_bounds(req: &BoundsRequest) -> Result<String> {
    use BoundsRequest as B;
    let result = match req {
        B::HoeffdingBound {
            side,
            eps,
            n,
            d,
            l,
            anchor,
        } => serde_json::to_value(bounds::hoeffding_bound(*side, *eps, *n, *d, *l, *anchor)?),
        B::HoeffdingSimplified {
            eps,
            n,
            d,
            l,
            lam_min_ex1,
        } => serde_json::to_value(bounds::hoeffding_simplified(
            *eps,
            *n,
            *d,
            *l,
            *lam_min_ex1,
        )?),
        B::BennettBound { t, n, d, l, sigma2 } => {
            serde_json::to_value(bounds::bennett_bound(*t, *n, *d, *l, *sigma2)?)
        }
        B::BennettPrecision {
            delta,
            n,
            d,
            l,
            sigma2,
        } => Ok(json!({ "precision": bounds::bennett_precision(*delta, *n, *d, *l, *sigma2)? })),
        B::BernsteinTail { t, n, d, sigma2, c } => {
            serde_json::to_value(bounds::bernstein_tail(*t, *n, *d, *sigma2, *c)?)
        }
        B::HoeffdingIntdim { eps, e_sn, l } => {
            serde_json::to_value(bounds::hoeffding_intdim(*eps, &matrix(e_sn)?, *l)?)
        }
        B::HoeffdingRefined {
            side,
            eps,
            e_sn,
            e_x1_anchor,
            n,
            l,
        } => serde_json::to_value(bounds::hoeffding_refined(
            *side,
            *eps,
            &matrix(e_sn)?,
            *e_x1_anchor,
            *n,
            *l,
        )?),
        B::BernsteinRefined { t, n, v, l, form } => {
            serde_json::to_value(bounds::bernstein_refined(*t, *n, &matrix(v)?, *l, *form)?)
        }
        B::GuaranteeE {
            n,
            delta,
            d,
            l,
            norm_minv,
        } => serde_json::to_value(bounds::guarantee_e(*n, *delta, *d, *l, *norm_minv)?),
        B::GuaranteeGFull {
            n,
            delta,
            d,
            l,
            m_mu,
            sigma2_thm,
        } => serde_json::to_value(bounds::guarantee_g_full(
            *n,
            *delta,
            *d,
            *l,
            &matrix(m_mu)?,
            *sigma2_thm,
        )?),
        B::GuaranteeGRefined {
            n,
            delta,
            d,
            l,
            m_mu,
            v,
        } => serde_json::to_value(bounds::guarantee_g_refined(
            *n,
            *delta,
            *d,
            *l,
            &matrix(m_mu)?,
            &matrix(v)?,
        )?),
    }
    .expect("reports serialize");
    Ok(to_json(
        json!({ "evaluator": req.name(), "result": result }),
    ))
}

/// Tail events that [`cmd_validate`] can check by simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// `λ_min(S_n) ≤ (1−ε)λ_min(E S_n)` against the Chernoff bound.
    HoeffdingMin,
    /// `‖S_n‖ ≥ (1+ε)‖E S_n‖` against the Chernoff bound.
    HoeffdingMax,
    /// Same event as `HoeffdingMax` against the `2·intdim` bound.
    HoeffdingIntdim,
    /// `HoeffdingMin` event with the refined prefactor.
    RefinedMin,
    /// `HoeffdingMax` event with the refined prefactor.
    RefinedMax,
    /// `‖S_n − E S_n‖ ≥ n·t` with `t` the Bennett precision at `delta`.
    Bennett,
    /// `‖S_n − E S_n‖ ≥ √n·t` against the refined Bernstein bound.
    BernsteinRefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub theorem: Theorem,
    pub pool: PoolSpec,
    #[serde(default = "default_design")]
    pub design: DesignChoice,
    pub n: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Deviation level for `bernstein_refined`.
    #[serde(default)]
    pub t: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub execution: Execution,
}

fn default_design() -> DesignChoice {
    DesignChoice::G
}

fn default_trials() -> u64 {
    10_000
}

fn default_eps() -> f64 {
    0.5
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub theorem: Theorem,
    pub n: u64,
    /// Threshold the event compares against.
    pub threshold: f64,
    pub conditions_met: bool,
    pub mc: McReport,
}

fn draw_sum(pool: &ExperimentPool, sampler: &Categorical, n: u64, rng: &mut SimRng) -> SymMatrix {
    let mut counts = SampleCounts::zeros(pool.len());
    for _ in 0..n {
        counts.increment(sampler.sample(rng));
    }
    sampling::realized_info(pool, &counts).expect("counts match the pool")
}

fn extreme(s: &SymMatrix, side: Side) -> f64 {
    let sp = spectral::eigh(s).expect("realized sums are finite");
    match side {
        Side::Min => sp.min(),
        Side::Max => sp.max(),
    }
}

/// Simulate `trials` draws of `S_n` from `mu` and compare the empirical
/// frequency of the theorem's event with its bound.
#[allow(clippy::too_many_arguments)]
pub fn validate_theorem(
    theorem: Theorem,
    pool: &ExperimentPool,
    mu: &DesignWeights,
    n: u64,
    trials: u64,
    eps: f64,
    delta: f64,
    t: Option<f64>,
    master_seed: u64,
    exec: Execution,
) -> Result<ValidationReport> {
    let d = pool.dim();
    let l = pool.max_sq_norm();
    let m = design::info_matrix(pool, mu)?;
    let sp = spectral::eigh(&m)?;
    let (m_min, m_max) = (sp.min(), sp.max());
    let e_sn = m.scaled(n as f64);
    let nf = n as f64;
    let sampler = Categorical::new(mu);
    let sigma2 = || -> Result<f64> { spectral::spectral_norm(&bounds::covariance(pool, mu)?) };

    let chernoff = |side: Side| -> (f64, f64) {
        match side {
            Side::Min => (m_min, (1.0 - eps) * nf * m_min),
            Side::Max => (m_max, (1.0 + eps) * nf * m_max),
        }
    };
    let (bound, threshold, conditions_met, deviation, side) = match theorem {
        Theorem::HoeffdingMin | Theorem::HoeffdingMax => {
            let side = if theorem == Theorem::HoeffdingMin {
                Side::Min
            } else {
                Side::Max
            };
            let (anchor, thr) = chernoff(side);
            (
                bounds::hoeffding_bound(side, eps, n, d, l, anchor)?.bound_value,
                thr,
                true,
                false,
                side,
            )
        }
        Theorem::RefinedMin | Theorem::RefinedMax => {
            let side = if theorem == Theorem::RefinedMin {
                Side::Min
            } else {
                Side::Max
            };
            let (anchor, thr) = chernoff(side);
            (
                bounds::hoeffding_refined(side, eps, &e_sn, anchor, n, l)?.bound_value,
                thr,
                true,
                false,
                side,
            )
        }
        Theorem::HoeffdingIntdim => {
            let (_, thr) = chernoff(Side::Max);
            (
                bounds::hoeffding_intdim(eps, &e_sn, l)?.bound_value,
                thr,
                true,
                false,
                Side::Max,
            )
        }
        Theorem::Bennett => {
            let s2 = sigma2()?;
            let thr = nf * bounds::bennett_precision(delta, n, d, l, s2)?;
            (
                bounds::bennett_bound(thr, n, d, l, s2)?.bound_value,
                thr,
                true,
                true,
                Side::Max,
            )
        }
        Theorem::BernsteinRefined => {
            let t = t.ok_or_else(|| usage("bernstein_refined needs a deviation level t"))?;
            let v = bounds::covariance(pool, mu)?;
            let r = bounds::bernstein_refined(t, n, &v, l, BernsteinForm::Proof)?;
            (
                r.bound_value,
                nf.sqrt() * t,
                r.conditions_met,
                true,
                Side::Max,
            )
        }
    };
    let event = |rng: &mut SimRng| {
        let s = draw_sum(pool, &sampler, n, rng);
        if deviation {
            let dev = s.sub(&e_sn);
            spectral::spectral_norm(&dev).expect("finite") >= threshold
        } else {
            match side {
                Side::Min => extreme(&s, side) <= threshold,
                Side::Max => extreme(&s, side) >= threshold,
            }
        }
    };
    let mc = bounds::mc_validate(event, bound, trials, master_seed, exec)?;
    Ok(ValidationReport {
        theorem,
        n,
        threshold,
        conditions_met,
        mc,
    })
}

/// Monte Carlo check of one theorem on one instance, as JSON.
pub fn cmd_validate(cfg: &ValidateConfig) -> Result<String> {
    let pool = cfg.pool.build(cfg.seed)?;
    let mu = cfg.design.solve(&pool, &cfg.solver)?;
    let master = derive_seed(cfg.seed, &[stream::TRIALS]);
    let report = validate_theorem(
        cfg.theorem,
        &pool,
        &mu,
        cfg.n,
        cfg.trials,
        cfg.eps,
        cfg.delta,
        cfg.t,
        master,
        cfg.execution,
    )?;
    Ok(to_json(
        serde_json::to_value(report).expect("reports serialize"),
    ))
}
