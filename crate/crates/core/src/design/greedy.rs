//! Greedy integer designs: add one experiment at a time, maximizing the
//! lexicographic score (rank after the pull, criterion after the pull).
//!
//! For E the criterion is the smallest eigenvalue on the range of
//! `A + x xᵀ`. With `A = Q Λ Qᵀ` and `z = Qᵀ x` that is the smallest root of
//! the secular equation `1 + Σ z_i² / (λ_i − t) = 0`, with the null space of
//! `A` collapsed to a single pole at zero carrying the weight `‖P_N x‖²`.
//!
//! For G, once `A` is invertible, Sherman–Morrison gives every post-pull
//! leverage from `G = X A⁻¹ Xᵀ` as `G_kk − G_kj² / (1 + G_jj)`.

use rand::Rng;

use super::{ExperimentPool, RANK_RTOL, SINGULAR_RTOL};
use crate::error::{invalid, Result};
use crate::linalg;
use crate::sampling::SampleCounts;
use crate::spectral::{self, Spectrum, SymMatrix};

/// Relative tolerance under which two scores are a tie.
const TIE_RTOL: f64 = 1e-12;

/// Lexicographic step score: rank, then the criterion, then an A-type
/// tiebreak (negated trace of the post-pull inverse) that separates designs
/// the criterion cannot, such as the intermediate steps on a canonical basis.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Score {
    rank: usize,
    value: f64,
    tiebreak: f64,
}

impl Score {
    fn new(rank: usize, value: f64) -> Self {
        Score {
            rank,
            value,
            tiebreak: 0.0,
        }
    }
}

fn near(a: f64, best: f64) -> bool {
    a >= best - TIE_RTOL * best.abs().max(f64::MIN_POSITIVE)
}

/// Pick uniformly among the candidates tied with the best score.
fn select<R: Rng + ?Sized>(scores: &[Score], rng: &mut R) -> usize {
    let top_rank = scores.iter().map(|s| s.rank).max().expect("non-empty pool");
    let mut ties: Vec<usize> = (0..scores.len())
        .filter(|&k| scores[k].rank == top_rank)
        .collect();
    let best = ties
        .iter()
        .map(|&k| scores[k].value)
        .fold(f64::NEG_INFINITY, f64::max);
    ties.retain(|&k| near(scores[k].value, best));
    let best = ties
        .iter()
        .map(|&k| scores[k].tiebreak)
        .fold(f64::NEG_INFINITY, f64::max);
    ties.retain(|&k| near(scores[k].tiebreak, best));
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    }
}

/// Smallest eigenvalue of `diag(poles) + w wᵀ`, poles ascending.
fn secular_min(poles: &[f64], w2: &[f64]) -> f64 {
    let total: f64 = w2.iter().sum();
    let scale = poles.last().map_or(0.0, |p| p.abs()).max(total);
    let merge = 1e-13 * scale;

    // Collapse numerically equal poles. A pole of multiplicity m keeps m − 1
    // copies of itself under a rank-one update.
    let mut vals: Vec<f64> = Vec::with_capacity(poles.len());
    let mut wts: Vec<f64> = Vec::with_capacity(poles.len());
    let mut first_multiplicity = 0;
    for (&p, &w) in poles.iter().zip(w2) {
        match vals.last() {
            Some(&v) if p - v <= merge => *wts.last_mut().unwrap() += w,
            _ => {
                vals.push(p);
                wts.push(w);
            }
        }
        if vals.len() == 1 {
            first_multiplicity += 1;
        }
    }
    if wts[0] <= 0.0 || first_multiplicity > 1 {
        return vals[0];
    }
    let mut lo = vals[0];
    let mut hi = lo + total;
    if vals.len() > 1 {
        hi = hi.min(vals[1]);
    }
    let f = |t: f64| 1.0 + vals.iter().zip(&wts).map(|(v, w)| w / (v - t)).sum::<f64>();
    while hi - lo > 1e-15 * hi.abs().max(lo.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The current matrix `A` in eigen form, split into null space and range.
struct RankOneView {
    spectrum: Spectrum,
    threshold: f64,
    null_count: usize,
}

impl RankOneView {
    fn new(a: &SymMatrix, threshold: f64) -> Result<Self> {
        let spectrum = spectral::eigh(a)?;
        let null_count = spectrum
            .eigenvalues
            .iter()
            .take_while(|&&l| l <= threshold)
            .count();
        Ok(RankOneView {
            spectrum,
            threshold,
            null_count,
        })
    }

    /// Rank of `A + x xᵀ` and its smallest eigenvalue on the range.
    fn score(&self, x: &[f64], poles: &mut Vec<f64>, w2: &mut Vec<f64>) -> Score {
        let d = self.spectrum.dim();
        let nc = self.null_count;
        let lam = &self.spectrum.eigenvalues;
        let mut null_weight = 0.0;
        poles.clear();
        w2.clear();
        for j in 0..d {
            let zj = linalg::dot(self.spectrum.eigenvector(j), x);
            if j < nc {
                null_weight += zj * zj;
            } else {
                poles.push(lam[j]);
                w2.push(zj * zj);
            }
        }
        let r = d - nc;
        if nc > 0 {
            poles.insert(0, 0.0);
            w2.insert(0, null_weight);
            let t = secular_min(poles, w2);
            if t > self.threshold {
                return Score::new(r + 1, t);
            }
            poles.remove(0);
            w2.remove(0);
        }
        if r == 0 {
            return Score::new(0, 0.0);
        }
        let mut score = Score::new(r, secular_min(poles, w2));
        if nc == 0 {
            // tr (A + x xᵀ)⁻¹ by Sherman–Morrison in the eigenbasis.
            let (mut t0, mut t1, mut t2) = (0.0, 0.0, 0.0);
            for (&l, &z2) in poles.iter().zip(w2.iter()) {
                t0 += 1.0 / l;
                t1 += z2 / l;
                t2 += z2 / (l * l);
            }
            score.tiebreak = -(t0 - t2 / (1.0 + t1));
        }
        score
    }
}

/// Greedy E stepper: each step maximizes `(rank, λ_min on the range)`.
pub struct GreedyE<'a> {
    pool: &'a ExperimentPool,
    a: SymMatrix,
    counts: SampleCounts,
}

impl<'a> GreedyE<'a> {
    pub fn new(pool: &'a ExperimentPool) -> Self {
        GreedyE {
            pool,
            a: SymMatrix::zeros(pool.dim()),
            counts: SampleCounts::zeros(pool.len()),
        }
    }

    /// Add experiment `k` without scoring.
    pub fn push(&mut self, k: usize) {
        self.a.add_outer(self.pool.row(k), 1.0);
        self.counts.increment(k);
    }

    /// Choose, record and return the next experiment.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        let view = RankOneView::new(&self.a, RANK_RTOL * self.pool.max_sq_norm())?;
        let (mut poles, mut w2) = (Vec::new(), Vec::new());
        let scores: Vec<Score> = self
            .pool
            .rows()
            .map(|x| view.score(x, &mut poles, &mut w2))
            .collect();
        let k = select(&scores, rng);
        self.push(k);
        Ok(k)
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.a
    }

    pub fn counts(&self) -> &SampleCounts {
        &self.counts
    }
}

/// Greedy G stepper: rank growth first, then the smallest post-pull
/// `max_k x_kᵀ (A + x xᵀ)⁻¹ x_k`.
pub struct GreedyG<'a> {
    pool: &'a ExperimentPool,
    a: SymMatrix,
    counts: SampleCounts,
    // Adding PSD terms never lowers the rank, so this latches.
    full_rank: bool,
}

impl<'a> GreedyG<'a> {
    pub fn new(pool: &'a ExperimentPool) -> Self {
        GreedyG {
            pool,
            a: SymMatrix::zeros(pool.dim()),
            counts: SampleCounts::zeros(pool.len()),
            full_rank: false,
        }
    }

    pub fn push(&mut self, k: usize) {
        self.a.add_outer(self.pool.row(k), 1.0);
        self.counts.increment(k);
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        let d = self.pool.dim();
        self.full_rank = self.full_rank || self.rank_is_full();
        let inv = if self.full_rank {
            linalg::spd_inverse(self.a.as_slice(), d)
        } else {
            None
        };
        let scores = match inv {
            Some(inv) => self.full_rank_scores(&inv),
            None => self.rank_phase_scores()?,
        };
        let k = select(&scores, rng);
        self.push(k);
        Ok(k)
    }

    fn rank_is_full(&self) -> bool {
        let d = self.pool.dim();
        let diag_max = (0..d).map(|i| self.a.get(i, i)).fold(0.0, f64::max);
        if diag_max <= 0.0 {
            return false;
        }
        // Cheap Cholesky screen; eigenvalues settle borderline cases.
        let mut g = self.a.as_slice().to_vec();
        if !linalg::cholesky_in_place(&mut g, d) {
            return false;
        }
        let lmin = spectral::lambda_min(&self.a).unwrap_or(0.0);
        lmin > RANK_RTOL * self.pool.max_sq_norm()
            && lmin > SINGULAR_RTOL * spectral::lambda_max(&self.a).unwrap_or(0.0)
    }

    fn full_rank_scores(&self, inv: &[f64]) -> Vec<Score> {
        let (k_count, d) = (self.pool.len(), self.pool.dim());
        let mut y = vec![0.0; k_count * d];
        for (k, x) in self.pool.rows().enumerate() {
            linalg::mat_vec(inv, d, x, &mut y[k * d..(k + 1) * d]);
        }
        let mut g = vec![0.0; k_count * k_count];
        for i in 0..k_count {
            let yi = &y[i * d..(i + 1) * d];
            for j in i..k_count {
                let v = linalg::dot(yi, self.pool.row(j));
                g[i * k_count + j] = v;
                g[j * k_count + i] = v;
            }
        }
        (0..k_count)
            .map(|j| {
                let denom = 1.0 + g[j * k_count + j];
                let (mut crit, mut total) = (f64::NEG_INFINITY, 0.0);
                for k in 0..k_count {
                    let gkj = g[k * k_count + j];
                    let lev = g[k * k_count + k] - gkj * gkj / denom;
                    crit = crit.max(lev);
                    total += lev;
                }
                Score {
                    rank: d,
                    value: -crit,
                    tiebreak: -total,
                }
            })
            .collect()
    }

    fn rank_phase_scores(&self) -> Result<Vec<Score>> {
        let d = self.pool.dim();
        let view = RankOneView::new(&self.a, RANK_RTOL * self.pool.max_sq_norm())?;
        let (mut poles, mut w2) = (Vec::new(), Vec::new());
        self.pool
            .rows()
            .map(|x| {
                let s = view.score(x, &mut poles, &mut w2);
                if s.rank < d {
                    return Ok(Score::new(s.rank, 0.0));
                }
                // This pull completes the rank: score the resulting criterion.
                let mut b = self.a.clone();
                b.add_outer(x, 1.0);
                let score = match linalg::spd_inverse(b.as_slice(), d) {
                    Some(inv) => {
                        let inv = SymMatrix::from_row_major(d, inv)?;
                        let levs = self.pool.rows().map(|x| inv.quad_form(x));
                        let (crit, total) =
                            levs.fold((f64::NEG_INFINITY, 0.0), |(m, t), l| (m.max(l), t + l));
                        Score {
                            rank: d,
                            value: -crit,
                            tiebreak: -total,
                        }
                    }
                    None => Score::new(d, f64::NEG_INFINITY),
                };
                Ok(score)
            })
            .collect()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.a
    }

    pub fn counts(&self) -> &SampleCounts {
        &self.counts
    }
}

fn check(pool: &ExperimentPool, n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("greedy design needs n ≥ 1"));
    }
    if pool.is_empty() {
        return Err(invalid("experiment pool is empty"));
    }
    Ok(())
}

/// Indices chosen by greedy E, in order; every prefix is itself the greedy
/// design of that length.
pub fn greedy_e_sequence<R: Rng + ?Sized>(
    pool: &ExperimentPool,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check(pool, n)?;
    let mut g = GreedyE::new(pool);
    (0..n).map(|_| g.step(rng)).collect()
}

pub fn greedy_e<R: Rng + ?Sized>(
    pool: &ExperimentPool,
    n: usize,
    rng: &mut R,
) -> Result<SampleCounts> {
    let seq = greedy_e_sequence(pool, n, rng)?;
    Ok(SampleCounts::from_indices(pool.len(), &seq))
}

pub fn greedy_g_sequence<R: Rng + ?Sized>(
    pool: &ExperimentPool,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check(pool, n)?;
    let mut g = GreedyG::new(pool);
    (0..n).map(|_| g.step(rng)).collect()
}

pub fn greedy_g<R: Rng + ?Sized>(
    pool: &ExperimentPool,
    n: usize,
    rng: &mut R,
) -> Result<SampleCounts> {
    let seq = greedy_g_sequence(pool, n, rng)?;
    Ok(SampleCounts::from_indices(pool.len(), &seq))
}
