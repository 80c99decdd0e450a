//! Acceptance criteria 1 to 9. Runs with a custom harness so that each
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.
//!
//! Random events are evaluated with a local Cholesky factorization and
//! `rand`'s weighted sampler, independent of the library's eigensolver and
//! categorical sampler. Criterion 9 reruns every campaign with the other
//! execution mode and compares the recorded artifacts byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Exp1;
use randesign::bounds::{
    bennett_bound, bennett_precision, covariance, guarantee_e, guarantee_g_full, hoeffding_bound,
    hoeffding_refined, mc_validate, sigma2_thm, Side,
};
use randesign::design::{
    crit_g, info_matrix, solve_e_relaxed, solve_g_relaxed, DesignWeights, ExperimentPool,
};
use randesign::harness::{cmd_exp_bai, cmd_exp_e, gaussian_pool, ExpBaiConfig, ExpEConfig};
use randesign::rng::{rng_for, SimRng};
use randesign::spectral::{self, dimension_summary, SymMatrix};
use randesign::Execution;

struct Outcome {
    detail: String,
    artifact: String,
    /// A failed verdict that still produced a campaign artifact.
    failure: Option<String>,
}

type Check = fn(Execution) -> Result<Outcome, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

// ---------------------------------------------------------------------------
// Local linear algebra on row-major d×d buffers.

fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = a[i * d + j] - (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// `a + c·I` is positive definite.
fn pd_shifted(a: &[f64], d: usize, c: f64) -> bool {
    let mut b = a.to_vec();
    for i in 0..d {
        b[i * d + i] += c;
    }
    cholesky(&b, d).is_some()
}

fn negated(a: &[f64]) -> Vec<f64> {
    a.iter().map(|v| -v).collect()
}

fn gram(rows: &[Vec<f64>], w: &[f64], d: usize) -> Vec<f64> {
    let mut s = vec![0.0; d * d];
    for (x, &c) in rows.iter().zip(w) {
        if c == 0.0 {
            continue;
        }
        for i in 0..d {
            for j in 0..d {
                s[i * d + j] += c * x[i] * x[j];
            }
        }
    }
    s
}

/// `max_k x_kᵀ S⁻¹ x_k`, `None` if `S` is not positive definite.
fn max_leverage(rows: &[Vec<f64>], s: &[f64], d: usize) -> Option<f64> {
    let l = cholesky(s, d)?;
    let mut best = f64::NEG_INFINITY;
    for x in rows {
        let mut y = vec![0.0; d];
        for i in 0..d {
            y[i] = (x[i] - (0..i).map(|k| l[i * d + k] * y[k]).sum::<f64>()) / l[i * d + i];
        }
        best = best.max(y.iter().map(|v| v * v).sum());
    }
    Some(best)
}

/// Counts of `n` i.i.d. draws from `mu`, as `f64` weights.
fn draw(sampler: &WeightedIndex<f64>, k: usize, n: u64, rng: &mut SimRng) -> Vec<f64> {
    let mut c = vec![0.0; k];
    for _ in 0..n {
        c[sampler.sample(rng)] += 1.0;
    }
    c
}

fn slack(p: f64, trials: u64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let t = trials as f64;
    3.0 * (p * (1.0 - p) / t).sqrt() + 1.0 / t
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn g_optimal(pool: &ExperimentPool) -> DesignWeights {
    solve_g_relaxed(pool, 1e-9, 1_000_000)
        .unwrap()
        .require_converged()
        .unwrap()
        .weights
}

fn n_min_e(delta: f64, d: usize, l: f64, norm_minv: f64) -> u64 {
    guarantee_e(u64::MAX / 2, delta, d, l, norm_minv)
        .unwrap()
        .n_min
}

// ---------------------------------------------------------------------------

fn ac1(_: Execution) -> Result<Outcome, String> {
    let mut worst = 0.0f64;
    for d in 2..=10 {
        let pool = ExperimentPool::canonical(d).unwrap();
        let e = solve_e_relaxed(&pool, 1e-7, 1_000_000)
            .and_then(|s| s.require_converged())
            .map_err(|e| e.to_string())?;
        let df = d as f64;
        ensure!(
            (e.objective - 1.0 / df).abs() <= 1e-6,
            "E objective {} at d = {d}",
            e.objective
        );
        for w in e.weights.as_slice() {
            ensure!((w - 1.0 / df).abs() <= 1e-4, "E weight {w} at d = {d}");
        }
        let g = solve_g_relaxed(&pool, 1e-9, 1_000_000).map_err(|e| e.to_string())?;
        ensure!(
            (g.objective / df - 1.0).abs() <= 1e-6,
            "G objective {} at d = {d}",
            g.objective
        );
    }
    // A step-1e-3 grid cannot resolve an interior optimum of the G criterion
    // to 1e-3 in every pool, so mismatches are collected together with the
    // Kiefer-Wolfowitz check `G = d` that certifies the solver's value.
    let mut artifact = String::new();
    let mut mismatches = Vec::new();
    for p in 0..20u64 {
        let pool = gaussian_pool(3, 2, p).unwrap();
        let rows = pool.to_rows();
        let (mut best_e, mut best_g) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..=1000u32 {
            for j in 0..=(1000 - i) {
                let w = [
                    i as f64 * 1e-3,
                    j as f64 * 1e-3,
                    (1000 - i - j) as f64 * 1e-3,
                ];
                let m = gram(&rows, &w, 2);
                let (a, b, c) = (m[0], m[1], m[3]);
                let half_tr = 0.5 * (a + c);
                let disc = (0.25 * (a - c).powi(2) + b * b).sqrt();
                best_e = best_e.max(half_tr - disc);
                if let Some(v) = max_leverage(&rows, &m, 2) {
                    best_g = best_g.min(v);
                }
            }
        }
        let e = solve_e_relaxed(&pool, 1e-7, 1_000_000)
            .map_err(|e| e.to_string())?
            .objective;
        let g = solve_g_relaxed(&pool, 1e-9, 1_000_000)
            .map_err(|e| e.to_string())?
            .objective;
        if (e - best_e).abs() > 1e-3 {
            mismatches.push(format!("pool {p}: E {e:.6} vs grid {best_e:.6}"));
        }
        if (g - best_g).abs() > 1e-3 {
            mismatches.push(format!("pool {p}: G {g:.9} (d = 2) vs grid {best_g:.6}"));
        }
        worst = worst.max((e - best_e).abs()).max((g - best_g).abs());
        artifact += &format!("{e:e},{g:e};");
    }
    let failure = (!mismatches.is_empty()).then(|| mismatches.join("; "));
    Ok(Outcome {
        detail: format!("canonical d=2..10 exact; 20 grid pools, max gap {worst:.2e}"),
        artifact,
        failure,
    })
}

fn ac2(_: Execution) -> Result<Outcome, String> {
    let mut rng = rng_for(2, &[]);
    let mut lowest = f64::INFINITY;
    for i in 0..500 {
        let d = rng.random_range(2..=8usize);
        let k = rng.random_range(d..=3 * d);
        let pool = gaussian_pool(k, d, 1000 + i).unwrap();
        let w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let mu = DesignWeights::normalized(w).unwrap();
        let crit = crit_g(&pool, &info_matrix(&pool, &mu).unwrap()).map_err(|e| e.to_string())?;
        ensure!(
            crit >= d as f64 * (1.0 - 1e-9),
            "pair {i}: crit_G {crit} < d = {d}"
        );
        lowest = lowest.min(crit / d as f64);
    }
    Ok(Outcome {
        detail: format!("500 pairs, min crit_G/d = {lowest:.4}"),
        artifact: format!("{lowest:e}"),
        failure: None,
    })
}

fn ac3(exec: Execution) -> Result<Outcome, String> {
    const TRIALS: u64 = 10_000;
    let mut checked = 0;
    let mut worst_margin = f64::INFINITY;
    let mut artifact = String::new();
    for d in 2..=5usize {
        for p in 0..3u64 {
            let pool = gaussian_pool(4 * d, d, 300 + 10 * d as u64 + p).unwrap();
            let rows = pool.to_rows();
            let mu = g_optimal(&pool);
            let m = info_matrix(&pool, &mu).unwrap();
            let lam = spectral::lambda_min(&m).unwrap();
            let top = spectral::lambda_max(&m).unwrap();
            let sigma2 = spectral::spectral_norm(&covariance(&pool, &mu).unwrap()).unwrap();
            let l = pool.max_sq_norm();
            let n = 4 * n_min_e(0.1, d, l, 1.0 / lam);
            let nf = n as f64;
            let e_sn = m.scaled(nf);
            let m_flat: Vec<f64> = m.as_slice().to_vec();
            let sampler = WeightedIndex::new(mu.as_slice().to_vec()).unwrap();
            let k = pool.len();

            let mut record = |name: &str, occurrences: u64, bound: f64| -> Result<(), String> {
                let empirical = occurrences as f64 / TRIALS as f64;
                let margin = bound + slack(bound, TRIALS) - empirical;
                ensure!(
                    margin >= 0.0,
                    "d={d} pool {p} {name}: empirical {empirical} > bound {bound} + slack"
                );
                worst_margin = worst_margin.min(margin);
                checked += 1;
                artifact += &format!("{d},{p},{name},{occurrences};");
                Ok(())
            };

            for (ti, eps) in [0.3, 0.5].into_iter().enumerate() {
                for side in [Side::Min, Side::Max] {
                    let anchor = if side == Side::Min { lam } else { top };
                    let plain = hoeffding_bound(side, eps, n, d, l, anchor)
                        .unwrap()
                        .bound_value;
                    let refined = hoeffding_refined(side, eps, &e_sn, anchor, n, l)
                        .unwrap()
                        .bound_value;
                    let event = |rng: &mut SimRng| {
                        let s = gram(&rows, &draw(&sampler, k, n, rng), d);
                        match side {
                            Side::Min => !pd_shifted(&s, d, -(1.0 - eps) * nf * lam),
                            Side::Max => !pd_shifted(&negated(&s), d, (1.0 + eps) * nf * top),
                        }
                    };
                    let seed =
                        31 * (10 * d as u64 + p) + 2 * ti as u64 + (side == Side::Max) as u64;
                    let mc =
                        mc_validate(event, plain, TRIALS, seed, exec).map_err(|e| e.to_string())?;
                    record(&format!("hoeffding_{side:?}_{eps}"), mc.occurrences, plain)?;
                    record(&format!("refined_{side:?}_{eps}"), mc.occurrences, refined)?;
                }
            }

            let t = nf * bennett_precision(0.2, n, d, l, sigma2).unwrap();
            let bound = bennett_bound(t, n, d, l, sigma2).unwrap().bound_value;
            let event = |rng: &mut SimRng| {
                let s = gram(&rows, &draw(&sampler, k, n, rng), d);
                let c: Vec<f64> = s.iter().zip(&m_flat).map(|(a, b)| a - nf * b).collect();
                !(pd_shifted(&c, d, t) && pd_shifted(&negated(&c), d, t))
            };
            let mc = mc_validate(event, bound, TRIALS, 7 + 31 * (10 * d as u64 + p), exec)
                .map_err(|e| e.to_string())?;
            record("bennett", mc.occurrences, bound)?;
        }
    }
    Ok(Outcome {
        detail: format!("{checked} tail checks dominated, min margin {worst_margin:.4}"),
        artifact,
        failure: None,
    })
}

fn ac4(exec: Execution) -> Result<Outcome, String> {
    const TRIALS: u64 = 10_000;
    let (d, k) = (5usize, 50usize);
    let pool = gaussian_pool(k, d, 4).unwrap();
    let rows = pool.to_rows();
    let l = pool.max_sq_norm();
    let mut detail = Vec::new();
    let mut artifact = String::new();

    let mu_e = solve_e_relaxed(&pool, 1e-6 * l, 1_000_000)
        .unwrap()
        .require_converged()
        .unwrap()
        .weights;
    let lam_e = spectral::lambda_min(&info_matrix(&pool, &mu_e).unwrap()).unwrap();
    let sampler_e = WeightedIndex::new(mu_e.as_slice().to_vec()).unwrap();
    let mu_g = g_optimal(&pool);
    let m_g = info_matrix(&pool, &mu_g).unwrap();
    let s2 = sigma2_thm(&mu_g, l);
    let sampler_g = WeightedIndex::new(mu_g.as_slice().to_vec()).unwrap();

    for delta in [0.05, 0.2] {
        let n = 16 * n_min_e(delta, d, l, 1.0 / lam_e);
        let report = guarantee_e(n, delta, d, l, 1.0 / lam_e).unwrap();
        // f_E(S_n⁻¹) > multiplier·f*_{E,n}  ⇔  λ_min(S_n) < n·λ_min(M)/multiplier
        let threshold = n as f64 * lam_e / report.multiplier;
        let event = |rng: &mut SimRng| {
            !pd_shifted(&gram(&rows, &draw(&sampler_e, k, n, rng), d), d, -threshold)
        };
        let mc = mc_validate(event, delta, TRIALS, 40 + (delta * 100.0) as u64, exec)
            .map_err(|e| e.to_string())?;
        ensure!(
            mc.empirical <= delta + slack(delta, TRIALS),
            "E, delta {delta}: frequency {}",
            mc.empirical
        );
        detail.push(format!("E δ={delta}: {:.4}", mc.empirical));
        artifact += &format!("e{delta}:{};", mc.occurrences);

        let n_min_g = guarantee_g_full(u64::MAX / 2, delta, d, l, &m_g, s2)
            .unwrap()
            .n_min;
        let n = 16 * n_min_g;
        let report = guarantee_g_full(n, delta, d, l, &m_g, s2).unwrap();
        let event = |rng: &mut SimRng| match max_leverage(
            &rows,
            &gram(&rows, &draw(&sampler_g, k, n, rng), d),
            d,
        ) {
            Some(v) => v * n as f64 / d as f64 > report.multiplier,
            None => true,
        };
        let mc = mc_validate(event, delta, TRIALS, 50 + (delta * 100.0) as u64, exec)
            .map_err(|e| e.to_string())?;
        ensure!(
            mc.empirical <= delta + slack(delta, TRIALS),
            "G, delta {delta}: frequency {}",
            mc.empirical
        );
        detail.push(format!("G δ={delta}: {:.4}", mc.empirical));
        artifact += &format!("g{delta}:{};", mc.occurrences);
    }
    Ok(Outcome {
        detail: detail.join(", "),
        artifact,
        failure: None,
    })
}

fn ac5(_: Execution) -> Result<Outcome, String> {
    let mut rng = rng_for(5, &[]);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let d = rng.random_range(2..=8usize);
        let r = rng.random_range(1..=d);
        let a: Vec<f64> = (0..d * r).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut s = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                s[i * d + j] = (0..r).map(|c| a[i * r + c] * a[j * r + c]).sum();
            }
        }
        let m = SymMatrix::from_row_major(d, s).unwrap();
        let sum = dimension_summary(&m).map_err(|e| e.to_string())?;
        let err = (sum.updim + sum.lowdim - d as f64).abs();
        ensure!(err <= 1e-9, "updim + lowdim off by {err}");
        worst = worst.max(err);
    }

    let pool = gaussian_pool(30, 4, 5).unwrap();
    let mu = randesign::design::uniform_design(30).unwrap();
    let m = info_matrix(&pool, &mu).unwrap();
    let sum = dimension_summary(&m).unwrap();
    let l = pool.max_sq_norm();
    let prefactor = |n: u64| {
        hoeffding_refined(Side::Max, 0.5, &m.scaled(n as f64), sum.spectral_norm, n, l)
            .unwrap()
            .prefactor
    };
    let ratio = prefactor(10_000) / sum.updim;
    ensure!(
        (ratio - 1.0).abs() <= 0.01,
        "prefactor/updim = {ratio} at n = 1e4"
    );
    ensure!(
        prefactor(10) > prefactor(100) && prefactor(100) >= prefactor(10_000),
        "prefactor not decreasing"
    );

    let flat = SymMatrix::identity(4).scaled(50.0);
    for side in [Side::Min, Side::Max] {
        let p = hoeffding_refined(side, 0.5, &flat, 1.0, 50, 1.0)
            .unwrap()
            .prefactor;
        ensure!(p == 4.0, "flat prefactor {p} on {side:?}");
    }
    Ok(Outcome {
        detail: format!("max |updim+lowdim-d| = {worst:.1e}, prefactor/updim at 1e4 = {ratio:.5}"),
        artifact: format!("{worst:e},{ratio:e}"),
        failure: None,
    })
}

fn ac6(exec: Execution) -> Result<Outcome, String> {
    const TRIALS: usize = 1000;
    let (d, k, n0) = (5usize, 50usize, 1000u64);
    let pool = gaussian_pool(k, d, 6).unwrap();
    let rows = pool.to_rows();
    let mu = g_optimal(&pool);
    let sampler = WeightedIndex::new(mu.as_slice().to_vec()).unwrap();
    let excess = |n: u64| -> Result<f64, String> {
        let v = exec.map_indices(TRIALS, |t| {
            let mut rng = rng_for(6, &[n, t as u64]);
            max_leverage(&rows, &gram(&rows, &draw(&sampler, k, n, &mut rng), d), d)
                .map(|v| v * n as f64 / d as f64 - 1.0)
        });
        let v: Option<Vec<f64>> = v.into_iter().collect();
        v.map(median)
            .ok_or_else(|| format!("singular draw at n = {n}"))
    };
    let r = [excess(n0)?, excess(4 * n0)?, excess(16 * n0)?];
    let f1 = r[0] / r[1];
    let f2 = r[1] / r[2];
    ensure!(
        (1.7..=2.3).contains(&f1) && (1.7..=2.3).contains(&f2),
        "factors {f1}, {f2}"
    );
    Ok(Outcome {
        detail: format!("factors {f1:.3}, {f2:.3}"),
        artifact: format!("{:e},{:e},{:e}", r[0], r[1], r[2]),
        failure: None,
    })
}

fn ac7(exec: Execution) -> Result<Outcome, String> {
    let cfg: ExpBaiConfig = serde_json::from_value(
        serde_json::json!({ "d_grid": [2, 3, 4, 5, 6], "seeds": 100, "seed": 7 }),
    )
    .unwrap();
    let cfg = ExpBaiConfig {
        execution: exec,
        ..cfg
    };
    ensure!(cfg.omega == 0.1 && cfg.delta == 0.05, "unexpected defaults");
    let csv = cmd_exp_bai(&cfg).map_err(|e| e.to_string())?;
    let mut means = std::collections::BTreeMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let d: usize = f[3].parse().unwrap();
        if f[1] == "mean" {
            means.insert((d, f[2].to_string()), f[5].parse::<f64>().unwrap());
        } else {
            ensure!(
                f[8] == "true" && f[6] == "0",
                "d={d} {} seed {}: arm {:?} stopped {}",
                f[2],
                f[1],
                f[6],
                f[7]
            );
        }
    }
    let mut ratios = Vec::new();
    for d in 2..=6 {
        let r = means[&(d, "randomized_g".to_string())] / means[&(d, "greedy_g".to_string())];
        ensure!(
            (0.5..=2.0).contains(&r),
            "d={d}: randomized/greedy samples {r}"
        );
        ratios.push(format!("{r:.2}"));
    }
    Ok(Outcome {
        detail: format!(
            "all 1000 runs find e1; randomized/greedy = [{}]",
            ratios.join(", ")
        ),
        artifact: csv,
        failure: None,
    })
}

fn ac8(exec: Execution) -> Result<Outcome, String> {
    let cfg: ExpEConfig = serde_json::from_value(serde_json::json!({
        "k": 500, "d": 10, "n_grid": [500], "seeds": 100, "seed": 8
    }))
    .unwrap();
    let cfg = ExpEConfig {
        execution: exec,
        ..cfg
    };
    let csv = cmd_exp_e(&cfg).map_err(|e| e.to_string())?;
    let mut mean = std::collections::HashMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[1] == "all" && f[6] == "lambda_min_mean" {
            mean.insert(f[2].to_string(), f[7].parse::<f64>().unwrap());
        }
        if f[1] == "all" && f[6] == "censored_fraction" {
            ensure!(f[7] == "0", "{} censored fraction {}", f[2], f[7]);
        }
    }
    let (r, g, u) = (mean["randomized_e"], mean["greedy_e"], mean["uniform"]);
    ensure!(r >= 0.95 * g, "randomized {r} < 0.95 greedy {g}");
    ensure!(
        r > u && g > u,
        "uniform {u} not beaten (randomized {r}, greedy {g})"
    );
    Ok(Outcome {
        detail: format!("mean λ_min randomized {r:.1}, greedy {g:.1}, uniform {u:.1}"),
        artifact: csv,
        failure: None,
    })
}

fn other(exec: Execution) -> Execution {
    match exec {
        Execution::Sequential => Execution::Parallel,
        Execution::Parallel => Execution::Sequential,
    }
}

const CRITERIA: [(Check, u64); 8] = [
    (ac1, 10),
    (ac2, 5),
    (ac3, 300),
    (ac4, 600),
    (ac5, 30),
    (ac6, 120),
    (ac7, 900),
    (ac8, 600),
];

fn run(check: Check, exec: Execution) -> (Result<Outcome, String>, Duration) {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(|| check(exec))).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panic: {msg}"))
    });
    (result, start.elapsed())
}

fn main() -> ExitCode {
    let exec = Execution::default();
    let mut artifacts = Vec::new();
    let mut failed = 0;
    for (i, (check, limit)) in CRITERIA.iter().enumerate() {
        let (result, took) = run(*check, exec);
        let secs = took.as_secs_f64();
        match result {
            Ok(o) => {
                let verdict = match o.failure {
                    Some(f) => Err(f),
                    None if secs >= *limit as f64 => {
                        Err(format!("took {secs:.1} s, limit {limit} s"))
                    }
                    None => Ok(o.detail),
                };
                match verdict {
                    Ok(detail) => println!("AC{} PASS ({secs:.1} s): {detail}", i + 1),
                    Err(e) => {
                        println!("AC{} FAIL ({secs:.1} s): {e}", i + 1);
                        failed += 1;
                    }
                }
                artifacts.push(Some(o.artifact));
            }
            Err(e) => {
                println!("AC{} FAIL ({secs:.1} s): {e}", i + 1);
                artifacts.push(None);
                failed += 1;
            }
        }
    }

    let start = Instant::now();
    let mut mismatches = Vec::new();
    for (i, ((check, _), first)) in CRITERIA.iter().zip(&artifacts).enumerate() {
        let Some(first) = first else {
            mismatches.push(format!("AC{} has no first run", i + 1));
            continue;
        };
        match run(*check, other(exec)).0 {
            Ok(o) if &o.artifact == first => {}
            Ok(_) => mismatches.push(format!("AC{} differs", i + 1)),
            Err(e) => mismatches.push(format!("AC{} rerun failed: {e}", i + 1)),
        }
    }
    let took = start.elapsed().as_secs_f64();
    if mismatches.is_empty() {
        println!(
            "AC9 PASS ({took:.1} s): reruns with {:?} execution byte-identical",
            other(exec)
        );
    } else {
        println!("AC9 FAIL ({took:.1} s): {}", mismatches.join("; "));
        failed += 1;
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
