//! Closed-form matrix concentration bounds, the finite-sample guarantees of
//! randomized designs built on them, and a Monte Carlo checker.
//!
//! Evaluators never clamp: a probability bound above 1 is returned as is and
//! flagged `vacuous`. All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::design::{weighted_gram, DesignWeights, ExperimentPool};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::rng::{rng_from_seed, split, SimRng};
use crate::spectral::{self, DimensionSummary, SymMatrix};

/// Which extreme eigenvalue a Chernoff-type bound controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `P(λ_min(S_n) ≤ (1−ε) λ_min(E S_n))`.
    Min,
    /// `P(‖S_n‖ ≥ (1+ε) ‖E S_n‖)`.
    Max,
}

/// Which reading of the refined Bernstein bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BernsteinForm {
    /// `P(‖S_n‖ ≥ √n·t) ≤ d̃·exp(−t²/(4σ²))` with `σ² = ‖V‖`.
    #[default]
    Proof,
    /// `P(‖S_n‖ ≥ √t) ≤ d̃·exp(−t²/(4‖V‖²))`, window in `‖V‖²`.
    AsPrinted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub bound_value: f64,
    /// `bound_value > 1`.
    pub vacuous: bool,
    pub conditions_met: bool,
    pub condition_detail: String,
    /// Dimensional prefactor in front of the exponential (`d`, `2·intdim`, `d̃`).
    pub prefactor: f64,
    /// Secondary reading of the same bound, when one exists.
    pub alternate_value: Option<f64>,
}

impl TailBoundReport {
    fn new(
        bound_value: f64,
        prefactor: f64,
        conditions_met: bool,
        detail: impl Into<String>,
    ) -> Self {
        TailBoundReport {
            bound_value,
            vacuous: bound_value > 1.0,
            conditions_met,
            condition_detail: detail.into(),
            prefactor,
            alternate_value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeReport {
    /// Smallest sample size satisfying the guarantee's n-condition.
    pub n_min: u64,
    /// Bound on `f(S_n⁻¹) / f*_n`.
    pub multiplier: f64,
    /// Bound on `f(S_n⁻¹)` (E) or on `‖S_n⁻¹ − (E S_n)⁻¹‖` (G).
    pub absolute_bound: f64,
    /// First-order part of `multiplier − 1`.
    pub leading_term: f64,
    pub confidence: f64,
    pub conditions_met: bool,
    pub effective_dimension: Option<f64>,
    pub notes: Vec<String>,
}

/// Outcome of [`mc_validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub trials: u64,
    pub occurrences: u64,
    pub empirical: f64,
    pub bound: f64,
    pub slack: f64,
    pub dominated: bool,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("eps must lie in (0, 1), got {eps}")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("delta must lie in (0, 1), got {delta}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be non-negative and finite, got {v}"
        )))
    }
}

/// `log` of the Chernoff base: `−ε − (1−ε)log(1−ε)` for the lower tail,
/// `ε − (1+ε)log(1+ε)` for the upper. Both are negative.
fn log_base(side: Side, eps: f64) -> f64 {
    match side {
        Side::Min => -eps - (1.0 - eps) * (-eps).ln_1p(),
        Side::Max => eps - (1.0 + eps) * eps.ln_1p(),
    }
}

/// Matrix Chernoff bound for sums of i.i.d. PSD matrices with `‖X_i‖ ≤ L`.
///
/// `anchor` is `λ_min(E X_1)` for [`Side::Min`] and `‖E X_1‖` for
/// [`Side::Max`]; the exponent is `n·anchor/L`.
pub fn hoeffding_bound(
    side: Side,
    eps: f64,
    n: u64,
    d: usize,
    l: f64,
    anchor: f64,
) -> Result<TailBoundReport> {
    check_eps(eps)?;
    check_positive("L", l)?;
    check_nonneg("anchor", anchor)?;
    let d = d as f64;
    let value = d * (log_base(side, eps) * n as f64 * anchor / l).exp();
    Ok(TailBoundReport::new(value, d, true, "0 < eps < 1"))
}

/// The simplified lower-tail form `d·exp(−ε²λ_min(E X_1)/(2L))`.
///
/// The primary value follows the printed statement, which has no `n` in the
/// exponent; `alternate_value` carries the `n`-scaled exponent that the
/// derivation from [`hoeffding_bound`] actually yields.
pub fn hoeffding_simplified(
    eps: f64,
    n: u64,
    d: usize,
    l: f64,
    lam_min_ex1: f64,
) -> Result<TailBoundReport> {
    check_eps(eps)?;
    check_positive("L", l)?;
    check_nonneg("lambda_min", lam_min_ex1)?;
    let d = d as f64;
    let rate = eps * eps * lam_min_ex1 / (2.0 * l);
    let mut report = TailBoundReport::new(
        d * (-rate).exp(),
        d,
        true,
        "printed exponent omits n; alternate_value scales it by n",
    );
    report.alternate_value = Some(d * (-rate * n as f64).exp());
    Ok(report)
}

/// Bennett-type bound `P(‖S_n‖ ≥ t) ≤ d·exp(−t²/(2Lt/3 + 2nσ²))` for centered
/// summands with `‖X_i‖ ≤ L` and `σ² = ‖E X_1²‖`.
pub fn bennett_bound(t: f64, n: u64, d: usize, l: f64, sigma2: f64) -> Result<TailBoundReport> {
    check_nonneg("t", t)?;
    check_positive("L", l)?;
    check_nonneg("sigma2", sigma2)?;
    let d = d as f64;
    let denom = 2.0 * l * t / 3.0 + 2.0 * n as f64 * sigma2;
    let value = if t == 0.0 {
        d
    } else {
        d * (-t * t / denom).exp()
    };
    Ok(TailBoundReport::new(value, d, true, "t >= 0"))
}

/// Per-sample precision `t` at which the Bennett bound on `‖S_n − E S_n‖ ≥ n·t`
/// drops to `δ/2`.
pub fn bennett_precision(delta: f64, n: u64, d: usize, l: f64, sigma2: f64) -> Result<f64> {
    check_delta(delta)?;
    check_nonneg("L", l)?;
    check_nonneg("sigma2", sigma2)?;
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let n = n as f64;
    let ell = (2.0 * d as f64 / delta).ln();
    let a = l * ell / (3.0 * n);
    Ok(a + (a * a + 2.0 * sigma2 * ell / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernsteinTail {
    pub threshold: f64,
    pub probability: f64,
}

/// Bernstein bound under the moment condition on the positive part:
/// `P(‖Σ X_i‖ ≥ √(2nσ²t) + ct) ≤ d·e^{−t}`.
pub fn bernstein_tail(t: f64, n: u64, d: usize, sigma2: f64, c: f64) -> Result<BernsteinTail> {
    check_nonneg("t", t)?;
    check_nonneg("sigma2", sigma2)?;
    check_nonneg("c", c)?;
    Ok(BernsteinTail {
        threshold: (2.0 * n as f64 * sigma2 * t).sqrt() + c * t,
        probability: d as f64 * (-t).exp(),
    })
}

fn summary_of_nonzero_psd(s: &SymMatrix) -> Result<DimensionSummary> {
    let summary = spectral::dimension_summary(s)?;
    if summary.lambda_min < -1e-12 * summary.spectral_norm {
        return Err(invalid("matrix must be positive semidefinite"));
    }
    Ok(summary)
}

/// Upper-tail Chernoff bound with the dimension replaced by `2·intdim(E S_n)`:
/// `2·intdim·(e^ε/(1+ε)^{1+ε})^{‖E S_n‖/L}`.
pub fn hoeffding_intdim(eps: f64, e_sn: &SymMatrix, l: f64) -> Result<TailBoundReport> {
    check_eps(eps)?;
    check_positive("L", l)?;
    let s = summary_of_nonzero_psd(e_sn)?;
    let prefactor = 2.0 * s.intdim;
    let value = prefactor * (log_base(Side::Max, eps) * s.spectral_norm / l).exp();
    Ok(TailBoundReport::new(value, prefactor, true, "0 < eps < 1"))
}

/// Chernoff bound with the `updim`/`lowdim` prefactor.
///
/// With `κ = ‖E S_n‖/λ_min(E S_n)` and `a = n·ε·anchor/L`:
/// `d̃_max = updim + lowdim·e^{−a(1−1/κ)}` and
/// `d̃_min = lowdim + updim·e^{−a(κ−1)}`. The exponential part is the one of
/// [`hoeffding_bound`]. The prefactor is returned in `prefactor`.
pub fn hoeffding_refined(
    side: Side,
    eps: f64,
    e_sn: &SymMatrix,
    e_x1_anchor: f64,
    n: u64,
    l: f64,
) -> Result<TailBoundReport> {
    check_eps(eps)?;
    check_positive("L", l)?;
    check_nonneg("anchor", e_x1_anchor)?;
    let s = summary_of_nonzero_psd(e_sn)?;
    if !(s.lambda_min > 0.0) {
        return Err(Error::Singular {
            lambda_min: s.lambda_min,
        });
    }
    let a = n as f64 * eps * e_x1_anchor / l;
    let prefactor = match side {
        Side::Max => s.updim + s.lowdim * (-a * (1.0 - 1.0 / s.cond)).exp(),
        Side::Min => s.lowdim + s.updim * (-a * (s.cond - 1.0)).exp(),
    };
    let value = prefactor * (log_base(side, eps) * n as f64 * e_x1_anchor / l).exp();
    Ok(TailBoundReport::new(
        value,
        prefactor,
        true,
        format!("kappa = {}", s.cond),
    ))
}

/// `updim(V) + lowdim(V)·e^{−n(1−1/κ)/16}`.
fn refined_dimension(s: &DimensionSummary, n: u64) -> f64 {
    let inv_kappa = if s.cond.is_finite() {
        1.0 / s.cond
    } else {
        0.0
    };
    s.updim + s.lowdim * (-(n as f64) * (1.0 - inv_kappa) / 16.0).exp()
}

/// Refined Bernstein bound for centered summands with covariance `V`.
///
/// See [`BernsteinForm`] for the two readings. The validity window on `t` is
/// checked and reported in `conditions_met`; the value is returned either way.
pub fn bernstein_refined(
    t: f64,
    n: u64,
    v: &SymMatrix,
    l: f64,
    form: BernsteinForm,
) -> Result<TailBoundReport> {
    check_nonneg("t", t)?;
    check_positive("L", l)?;
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let s = summary_of_nonzero_psd(v)?;
    let prefactor = refined_dimension(&s, n);
    let scale = match form {
        BernsteinForm::Proof => s.spectral_norm,
        BernsteinForm::AsPrinted => s.spectral_norm * s.spectral_norm,
    };
    let rn = (n as f64).sqrt();
    let upper = 3.0 * n as f64 * scale / l;
    let lower = rn * scale + l / (3.0 * rn);
    let inside = t > lower && t < upper;
    let value = prefactor * (-t * t / (4.0 * scale)).exp();
    let event = match form {
        BernsteinForm::Proof => "P(||S_n|| >= sqrt(n) t)",
        BernsteinForm::AsPrinted => "P(||S_n|| >= sqrt(t))",
    };
    Ok(TailBoundReport::new(
        value,
        prefactor,
        inside,
        format!("{event}; window {lower} < t < {upper}"),
    ))
}

/// Finite-sample guarantee for the randomized E-optimal design.
///
/// Valid for `n > 2L‖M⁻¹‖log(d/δ)`; the multiplier is
/// `1 + 1/(√(n/threshold) − 1)` and holds with probability `1 − δ`.
pub fn guarantee_e(
    n: u64,
    delta: f64,
    d: usize,
    l: f64,
    norm_minv: f64,
) -> Result<GuaranteeReport> {
    check_delta(delta)?;
    check_positive("L", l)?;
    check_positive("norm_Minv", norm_minv)?;
    let threshold = 2.0 * l * norm_minv * (d as f64 / delta).ln();
    let n_min = threshold.ceil().max(1.0) as u64;
    if !(n as f64 > threshold) {
        return Err(Error::SampleSizeTooSmall {
            n,
            n_min,
            threshold,
        });
    }
    let root = (threshold / n as f64).sqrt();
    let multiplier = 1.0 + root / (1.0 - root);
    Ok(GuaranteeReport {
        n_min,
        multiplier,
        absolute_bound: multiplier * norm_minv / n as f64,
        leading_term: root,
        confidence: 1.0 - delta,
        conditions_met: true,
        effective_dimension: Some(d as f64),
        notes: vec![format!("requires n > {threshold}")],
    })
}

fn inverse_norm(m: &SymMatrix) -> Result<f64> {
    let lmin = spectral::lambda_min(m)?;
    if !(lmin > 0.0) {
        return Err(Error::Singular { lambda_min: lmin });
    }
    Ok(1.0 / lmin)
}

/// Full finite-sample guarantee for the randomized G-optimal design, with the
/// confidence budget split evenly between the Chernoff and Bennett events.
///
/// `absolute_bound` bounds `‖S_n⁻¹ − (E S_n)⁻¹‖`; `multiplier` is
/// `1 + (L·n/d)·absolute_bound`, using `f*_{G,n} = d/n`.
pub fn guarantee_g_full(
    n: u64,
    delta: f64,
    d: usize,
    l: f64,
    m_mu: &SymMatrix,
    sigma2_thm: f64,
) -> Result<GuaranteeReport> {
    check_delta(delta)?;
    check_positive("L", l)?;
    check_nonneg("sigma2", sigma2_thm)?;
    let minv = inverse_norm(m_mu)?;
    let df = d as f64;
    let ell = (2.0 * df / delta).ln();
    let threshold = 2.0 * l * minv * ell;
    let n_min = threshold.ceil().max(1.0) as u64;
    if !(n as f64 > threshold) {
        return Err(Error::SampleSizeTooSmall {
            n,
            n_min,
            threshold,
        });
    }
    let nf = n as f64;
    let denom = 1.0 - (threshold / nf).sqrt();
    let numer = l / 3.0 * ell + (2.0 * nf * sigma2_thm * ell).sqrt();
    let absolute_bound = minv * minv * numer / (nf * nf * denom);
    Ok(GuaranteeReport {
        n_min,
        multiplier: 1.0 + l * nf / df * absolute_bound,
        absolute_bound,
        leading_term: l / df * minv * minv * (2.0 * sigma2_thm / nf * (df / delta).ln()).sqrt(),
        confidence: 1.0 - delta,
        conditions_met: true,
        effective_dimension: Some(df),
        notes: vec![format!("requires n > {threshold}")],
    })
}

/// Guarantee for the randomized G-optimal design with the refined dimension
/// `d̃ = updim(V) + lowdim(V)·e^{−n(1−1/κ)/16}` of the covariance `V`.
///
/// Only the first-order term is available, so `multiplier = 1 + leading_term`
/// with `leading_term = (L/d)‖M⁻¹‖²√(4σ²/n·log(d̃/δ))` and `σ² = ‖V‖`. The
/// condition `n ≥ (4L²/(9‖V‖))log(d̃/δ)` involves `d̃`, itself a function of
/// `n`; it is checked at the given `n` and `n_min` is the smallest sample size
/// satisfying it. Confidence is `1 − 2δ`.
pub fn guarantee_g_refined(
    n: u64,
    delta: f64,
    d: usize,
    l: f64,
    m_mu: &SymMatrix,
    v: &SymMatrix,
) -> Result<GuaranteeReport> {
    check_delta(delta)?;
    check_positive("L", l)?;
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let minv = inverse_norm(m_mu)?;
    let s = summary_of_nonzero_psd(v)?;
    if !(s.lambda_min > 0.0) {
        return Err(Error::Singular {
            lambda_min: s.lambda_min,
        });
    }
    let sigma2 = s.spectral_norm;
    let coeff = 4.0 * l * l / (9.0 * sigma2);
    let holds = |m: u64| m as f64 >= coeff * (refined_dimension(&s, m) / delta).ln();
    let n_min = smallest_satisfying(holds);
    let conditions_met = holds(n);
    let d_tilde = refined_dimension(&s, n);
    let nf = n as f64;
    let log_term = (d_tilde / delta).ln().max(0.0);
    let root = (4.0 * sigma2 / nf * log_term).sqrt();
    let leading_term = l / d as f64 * minv * minv * root;
    let mut notes = vec!["sigma^2 taken as ||V||".to_string()];
    if !conditions_met {
        notes.push(format!(
            "sample-size condition fails at n = {n}; holds from n = {n_min}"
        ));
    }
    Ok(GuaranteeReport {
        n_min,
        multiplier: 1.0 + leading_term,
        absolute_bound: minv * minv * root / nf,
        leading_term,
        confidence: 1.0 - 2.0 * delta,
        conditions_met,
        effective_dimension: Some(d_tilde),
        notes,
    })
}

/// Smallest `m ≥ 1` with `holds(m)`, for a predicate that is monotone in `m`.
fn smallest_satisfying(holds: impl Fn(u64) -> bool) -> u64 {
    let mut hi = 1u64;
    while !holds(hi) {
        hi = hi.saturating_mul(2);
        if hi == u64::MAX {
            return hi;
        }
    }
    if hi == 1 {
        return 1;
    }
    // The doubling stopped at the first power of two that holds.
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `L²·Σ_k μ_k(1 − μ_k)`, the variance proxy of the G guarantee.
pub fn sigma2_thm(mu: &DesignWeights, l: f64) -> f64 {
    l * l * mu.as_slice().iter().map(|m| m * (1.0 - m)).sum::<f64>()
}

/// Covariance `V = E[X_1²] − M(μ)²` of `X_1 = x xᵀ` with `x ~ μ`. Its norm is
/// `σ² = ‖E[(X_1 − M)²]‖` for the centered summands.
pub fn covariance(pool: &ExperimentPool, mu: &DesignWeights) -> Result<SymMatrix> {
    if mu.len() != pool.len() {
        return Err(invalid("weights and pool lengths differ"));
    }
    let w: Vec<f64> = pool
        .rows()
        .zip(mu.as_slice())
        .map(|(x, m)| m * x.iter().map(|v| v * v).sum::<f64>())
        .collect();
    let second = weighted_gram(pool, &w);
    let m = weighted_gram(pool, mu.as_slice());
    Ok(second.sub(&m.square()))
}

/// Monte Carlo slack `3·√(p(1−p)/trials) + 1/trials` with `p` the bound
/// clipped to `[0, 1]`.
pub fn mc_slack(bound: f64, trials: u64) -> f64 {
    let p = bound.clamp(0.0, 1.0);
    let t = trials as f64;
    3.0 * (p * (1.0 - p) / t).sqrt() + 1.0 / t
}

/// Fraction of `trials` seeded draws on which `event` occurs, compared with
/// `bound` up to [`mc_slack`]. Trial `i` runs on `split(master_seed, i)`.
pub fn mc_validate<F>(
    event: F,
    bound: f64,
    trials: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<McReport>
where
    F: Fn(&mut SimRng) -> bool + Sync + Send,
{
    if trials < 100 {
        return Err(invalid(format!(
            "mc_validate needs at least 100 trials, got {trials}"
        )));
    }
    check_nonneg("bound", bound)?;
    let hits = exec.map_indices(trials as usize, |i| {
        let mut rng = rng_from_seed(split(master_seed, i as u64));
        event(&mut rng)
    });
    let occurrences = hits.iter().filter(|&&h| h).count() as u64;
    let empirical = occurrences as f64 / trials as f64;
    let slack = mc_slack(bound, trials);
    Ok(McReport {
        trials,
        occurrences,
        empirical,
        bound,
        slack,
        dominated: empirical <= bound + slack,
    })
}
