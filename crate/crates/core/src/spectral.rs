//! Dense symmetric-matrix machinery.
//!
//! [`SymMatrix`] is the one matrix type in the crate: information matrices,
//! realized sums, covariance matrices and inverses all live in it. Spectral
//! quantities come from [`eigh`], a cyclic Jacobi eigensolver that is
//! deterministic for a given input.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg;

/// Off-diagonal Frobenius norm threshold, relative to `‖S‖_F`.
const JACOBI_RTOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Relative spread below which a spectrum counts as flat.
pub const FLAT_SPECTRUM_RTOL: f64 = 1e-12;

/// Real symmetric `d × d` matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Build from row-major entries; the result is `(A + Aᵀ)/2`.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let mut m = SymMatrix { dim, data };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("matrix rows must form a square array"));
        }
        Self::from_row_major(dim, rows.concat())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = v;
        }
        m
    }

    /// `x xᵀ`.
    pub fn outer(x: &[f64]) -> Self {
        let mut m = Self::zeros(x.len());
        m.add_outer(x, 1.0);
        m
    }

    fn symmetrize(&mut self) {
        let d = self.dim;
        for i in 0..d {
            for j in (i + 1)..d {
                let avg = 0.5 * (self.data[i * d + j] + self.data[j * d + i]);
                self.data[i * d + j] = avg;
                self.data[j * d + i] = avg;
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self += w · x xᵀ`.
    pub fn add_outer(&mut self, x: &[f64], w: f64) {
        let d = self.dim;
        debug_assert_eq!(x.len(), d);
        for i in 0..d {
            let wi = w * x[i];
            let row = &mut self.data[i * d..(i + 1) * d];
            for (r, &xj) in row.iter_mut().zip(x) {
                *r += wi * xj;
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + c I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.data[i * self.dim + i] += c;
        }
        m
    }

    /// `S²`, which is symmetric again.
    pub fn square(&self) -> Self {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += self.data[i * d + k] * self.data[k * d + j];
                }
                out[i * d + j] = s;
                out[j * d + i] = s;
            }
        }
        SymMatrix { dim: d, data: out }
    }

    /// `xᵀ S x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        linalg::quad_form(&self.data, self.dim, x)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        linalg::mat_vec(&self.data, self.dim, x, &mut y);
        y
    }

    /// Inverse through Cholesky; `None` if not numerically positive definite.
    /// Cheaper than [`psd_inverse`] for hot loops that know the matrix is
    /// well conditioned.
    pub fn cholesky_inverse(&self) -> Option<Self> {
        linalg::spd_inverse(&self.data, self.dim).map(|data| SymMatrix {
            dim: self.dim,
            data,
        })
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

/// Eigendecomposition `S = Q diag(λ) Qᵀ` with eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `j` (at `vectors[j*d..(j+1)*d]`) pairs with `eigenvalues[j]`.
    vectors: Vec<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, j: usize) -> &[f64] {
        let d = self.dim();
        &self.vectors[j * d..(j + 1) * d]
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// `Qᵀ x`: coordinates of `x` in the eigenbasis.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|j| linalg::dot(self.eigenvector(j), x))
            .collect()
    }

    /// `Q diag(values) Qᵀ`.
    pub fn compose(&self, values: &[f64]) -> SymMatrix {
        let d = self.dim();
        let mut m = SymMatrix::zeros(d);
        for (j, &v) in values.iter().enumerate() {
            if v != 0.0 {
                m.add_outer(self.eigenvector(j), v);
            }
        }
        m.symmetrize();
        m
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.compose(&self.eigenvalues)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// `1e-12 · ‖S‖_F`; eigenvectors are signed so their first non-negligible
/// component is positive.
pub fn eigh(s: &SymMatrix) -> Result<Spectrum> {
    if !s.is_finite() {
        return Err(invalid("matrix has non-finite entries"));
    }
    let d = s.dim;
    let mut a = s.data.clone();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }

    let scale = s.frobenius_norm();
    let threshold = JACOBI_RTOL * scale;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                s += 2.0 * a[i * d + j] * a[i * d + j];
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweep = 0;
    while !converged && sweep < JACOBI_MAX_SWEEPS {
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - sn * akq;
                    a[k * d + q] = sn * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - sn * aqk;
                    a[q * d + k] = sn * apk + c * aqk;
                }
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;

                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - sn * vkq;
                    v[k * d + q] = sn * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
        converged = off_norm(&a) <= threshold;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[i * d + i].total_cmp(&a[j * d + j]).then(i.cmp(&j)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * d + i]).collect();
    let mut vectors = vec![0.0; d * d];
    for (col, &src) in order.iter().enumerate() {
        let out = &mut vectors[col * d..(col + 1) * d];
        for k in 0..d {
            out[k] = v[k * d + src];
        }
        let lead = out.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(0.0);
        if lead < 0.0 {
            out.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(Spectrum {
        eigenvalues,
        vectors,
    })
}

/// Spectral norm `max |λ|` (the largest eigenvalue for PSD input).
pub fn spectral_norm(s: &SymMatrix) -> Result<f64> {
    let sp = eigh(s)?;
    Ok(sp.max().abs().max(sp.min().abs()))
}

pub fn lambda_max(s: &SymMatrix) -> Result<f64> {
    Ok(eigh(s)?.max())
}

pub fn lambda_min(s: &SymMatrix) -> Result<f64> {
    Ok(eigh(s)?.min())
}

/// Spectral inverse of a PSD matrix.
///
/// Fails with [`Error::Singular`] when any eigenvalue is `≤ tol · ‖S‖`.
pub fn psd_inverse(s: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let sp = eigh(s)?;
    let norm = sp.max().abs().max(sp.min().abs());
    if norm == 0.0 || sp.min() <= tol * norm {
        return Err(Error::Singular {
            lambda_min: sp.min(),
        });
    }
    let inv: Vec<f64> = sp.eigenvalues.iter().map(|l| 1.0 / l).collect();
    Ok(sp.compose(&inv))
}

/// Projection onto the PSD cone: negative eigenvalues clipped to zero.
pub fn positive_part(s: &SymMatrix) -> Result<SymMatrix> {
    let sp = eigh(s)?;
    let clipped: Vec<f64> = sp.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    Ok(sp.compose(&clipped))
}

/// `Q f(D) Qᵀ`; fails if `f` yields a non-finite value on the spectrum.
pub fn matrix_function(s: &SymMatrix, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
    let sp = eigh(s)?;
    let mut mapped = Vec::with_capacity(sp.dim());
    for &l in &sp.eigenvalues {
        let v = f(l);
        if !v.is_finite() {
            return Err(Error::DomainError { eigenvalue: l });
        }
        mapped.push(v);
    }
    Ok(sp.compose(&mapped))
}

pub fn matrix_exp(s: &SymMatrix) -> Result<SymMatrix> {
    matrix_function(s, f64::exp)
}

pub fn matrix_log(s: &SymMatrix) -> Result<SymMatrix> {
    matrix_function(s, |x| if x > 0.0 { x.ln() } else { f64::NAN })
}

/// Effective-dimension summary of a PSD matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionSummary {
    /// `trace(S) / ‖S‖`.
    pub intdim: f64,
    /// `trace(S − λ_min I) / (‖S‖ − λ_min)`.
    pub updim: f64,
    /// `d − updim`.
    pub lowdim: f64,
    /// `‖S‖ / λ_min`, infinite for singular `S`.
    pub cond: f64,
    pub lambda_min: f64,
    pub spectral_norm: f64,
}

impl DimensionSummary {
    pub fn is_flat(&self) -> bool {
        self.spectral_norm - self.lambda_min <= FLAT_SPECTRUM_RTOL * self.spectral_norm
    }
}

/// Intrinsic, upper and lower intrinsic dimensions of a nonzero PSD matrix.
///
/// For a flat spectrum the upper/lower ratios are 0/0; the convention here
/// is `updim = d`, `lowdim = 0`.
pub fn dimension_summary(s: &SymMatrix) -> Result<DimensionSummary> {
    let sp = eigh(s)?;
    dimension_summary_from(&sp)
}

pub fn dimension_summary_from(sp: &Spectrum) -> Result<DimensionSummary> {
    let d = sp.dim() as f64;
    let top = sp.max();
    let bottom = sp.min();
    if top <= 0.0 {
        return Err(invalid("dimension summary needs a nonzero PSD matrix"));
    }
    let trace: f64 = sp.eigenvalues.iter().sum();
    let intdim = (trace / top).clamp(1.0, d);
    let spread = top - bottom;
    let (updim, lowdim) = if spread <= FLAT_SPECTRUM_RTOL * top {
        (d, 0.0)
    } else {
        let up = ((trace - d * bottom) / spread).clamp(0.0, d);
        (up, d - up)
    };
    let cond = if bottom > 0.0 {
        top / bottom
    } else {
        f64::INFINITY
    };
    Ok(DimensionSummary {
        intdim,
        updim,
        lowdim,
        cond,
        lambda_min: bottom,
        spectral_norm: top,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_symmetric(rng: &mut impl Rng, d: usize) -> SymMatrix {
        let data: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        SymMatrix::from_row_major(d, data).unwrap()
    }

    fn random_psd(rng: &mut impl Rng, d: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(d);
        for _ in 0..d + 2 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            m.add_outer(&x, rng.random_range(0.0..2.0));
        }
        m
    }

    fn check_spectrum(s: &SymMatrix, sp: &Spectrum) {
        let d = s.dim();
        let rec = sp.reconstruct();
        let err = rec.sub(s).max_abs();
        assert!(
            err <= 1e-10 * (1.0 + s.max_abs()),
            "reconstruction error {err}"
        );
        for i in 0..d {
            for j in 0..d {
                let g = linalg::dot(sp.eigenvector(i), sp.eigenvector(j));
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g - e).abs() <= 1e-10, "orthonormality ({i},{j}) = {g}");
            }
        }
        assert!(sp.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn symmetry_enforced_by_averaging() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![4.0, 3.0]]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(SymMatrix::from_row_major(0, vec![]).is_err());
    }

    #[test]
    fn eigh_diagonal() {
        let sp = eigh(&SymMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(sp.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert_eq!(sp.eigenvector(0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn eigh_identity() {
        let s = SymMatrix::identity(4);
        let sp = eigh(&s).unwrap();
        assert_eq!(sp.eigenvalues, vec![1.0; 4]);
        check_spectrum(&s, &sp);
    }

    #[test]
    fn eigh_two_by_two() {
        // λ² − 4λ + 3 = 0
        let s = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let sp = eigh(&s).unwrap();
        assert_abs_diff_eq!(sp.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sp.eigenvalues[1], 3.0, epsilon = 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(sp.eigenvector(0)[0], r, epsilon = 1e-14);
        assert_abs_diff_eq!(sp.eigenvector(0)[1], -r, epsilon = 1e-14);
        check_spectrum(&s, &sp);
    }

    #[test]
    fn eigh_rejects_non_finite() {
        let s = SymMatrix::from_diag(&[1.0, f64::NAN]);
        assert!(matches!(eigh(&s), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn eigh_random_matrices() {
        let mut rng = crate::rng::rng_from_seed(11);
        for k in 0..1000 {
            let d = 1 + k % 12;
            let s = random_symmetric(&mut rng, d);
            let sp = eigh(&s).unwrap();
            check_spectrum(&s, &sp);
            assert_eq!(sp, eigh(&s).unwrap());
        }
    }

    #[test]
    fn extreme_eigenvalues() {
        let s = SymMatrix::from_diag(&[5.0, 2.0]);
        assert_eq!(spectral_norm(&s).unwrap(), 5.0);
        assert_eq!(lambda_min(&s).unwrap(), 2.0);
        let z = SymMatrix::zeros(3);
        assert_eq!(spectral_norm(&z).unwrap(), 0.0);
        assert_eq!(lambda_min(&z).unwrap(), 0.0);
        let t = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_abs_diff_eq!(spectral_norm(&t).unwrap(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(lambda_min(&t).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(
            spectral_norm(&SymMatrix::from_diag(&[1.0, -4.0])).unwrap(),
            4.0
        );
        assert_eq!(
            lambda_max(&SymMatrix::from_diag(&[1.0, -4.0])).unwrap(),
            1.0
        );
    }

    #[test]
    fn inverse_cases() {
        let inv = psd_inverse(&SymMatrix::from_diag(&[2.0, 4.0]), 1e-12).unwrap();
        assert_abs_diff_eq!(inv.get(0, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.get(1, 1), 0.25, epsilon = 1e-15);
        assert_eq!(
            psd_inverse(&SymMatrix::identity(3), 1e-12).unwrap(),
            SymMatrix::identity(3)
        );
        assert!(matches!(
            psd_inverse(&SymMatrix::from_diag(&[1.0, 0.0]), 1e-9),
            Err(Error::Singular { lambda_min }) if lambda_min == 0.0
        ));
        let c = SymMatrix::from_diag(&[2.0, 4.0])
            .cholesky_inverse()
            .unwrap();
        assert_abs_diff_eq!(c.get(1, 1), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn positive_part_cases() {
        let p = positive_part(&SymMatrix::from_diag(&[1.0, -1.0])).unwrap();
        assert_eq!(p, SymMatrix::from_diag(&[1.0, 0.0]));
        let s = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(positive_part(&s).unwrap().sub(&s).max_abs() < 1e-14);
        // eigenpairs (±1, (1, ±1)/√2)
        let swap = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let p = positive_part(&swap).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(p.get(i, j), 0.5, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn matrix_functions() {
        let e = matrix_exp(&SymMatrix::zeros(3)).unwrap();
        assert_eq!(e, SymMatrix::identity(3));
        let e1 = std::f64::consts::E;
        let l = matrix_log(&SymMatrix::from_diag(&[e1, e1 * e1])).unwrap();
        assert_abs_diff_eq!(l.get(0, 0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l.get(1, 1), 2.0, epsilon = 1e-14);
        let s = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let back = matrix_log(&matrix_exp(&s).unwrap()).unwrap();
        assert!(back.sub(&s).max_abs() < 1e-9);
        assert!(matches!(
            matrix_log(&SymMatrix::from_diag(&[1.0, 0.0])),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn dimension_summary_examples() {
        let s = dimension_summary(&SymMatrix::from_diag(&[3.0, 2.0, 1.0])).unwrap();
        assert_abs_diff_eq!(s.intdim, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.updim, 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.lowdim, 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.cond, 3.0, epsilon = 1e-14);

        let flat = dimension_summary(&SymMatrix::identity(5)).unwrap();
        assert_eq!(
            (flat.intdim, flat.updim, flat.lowdim, flat.cond),
            (5.0, 5.0, 0.0, 1.0)
        );
        assert!(flat.is_flat());

        let d = 6;
        let mut diag = vec![0.0; d];
        diag[0] = 1.0;
        let r1 = dimension_summary(&SymMatrix::from_diag(&diag)).unwrap();
        assert_abs_diff_eq!(r1.intdim, 1.0);
        assert_abs_diff_eq!(r1.updim, 1.0);
        assert_abs_diff_eq!(r1.lowdim, (d - 1) as f64);
        assert!(r1.cond.is_infinite());

        assert!(matches!(
            dimension_summary(&SymMatrix::zeros(2)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn one_by_one_supported() {
        let s = SymMatrix::from_diag(&[4.0]);
        assert_eq!(eigh(&s).unwrap().eigenvalues, vec![4.0]);
        assert_eq!(psd_inverse(&s, 1e-12).unwrap().get(0, 0), 0.25);
        let sum = dimension_summary(&s).unwrap();
        assert_eq!((sum.intdim, sum.updim, sum.lowdim), (1.0, 1.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn dimensions_scale_invariant_and_sum_to_d(seed in any::<u64>(), d in 1usize..9, c in 0.01f64..100.0) {
            let mut rng = crate::rng::rng_from_seed(seed);
            let s = random_psd(&mut rng, d);
            let a = dimension_summary(&s).unwrap();
            let b = dimension_summary(&s.scaled(c)).unwrap();
            prop_assert!((a.updim + a.lowdim - d as f64).abs() <= 1e-9 * d as f64);
            prop_assert!(a.intdim >= 1.0 && a.intdim <= d as f64);
            prop_assert!((a.intdim - b.intdim).abs() <= 1e-9);
            prop_assert!((a.updim - b.updim).abs() <= 1e-9);
            prop_assert!((a.lowdim - b.lowdim).abs() <= 1e-9);
            if a.lambda_min > 0.0 {
                prop_assert!((a.cond - a.spectral_norm / a.lambda_min).abs() <= 1e-9 * a.cond);
            }
        }

        #[test]
        fn positive_and_negative_parts_recompose(seed in any::<u64>(), d in 1usize..9) {
            let mut rng = crate::rng::rng_from_seed(seed);
            let s = random_symmetric(&mut rng, d);
            let pos = positive_part(&s).unwrap();
            let neg = positive_part(&s.scaled(-1.0)).unwrap();
            prop_assert!(pos.sub(&neg).sub(&s).max_abs() <= 1e-9);
            prop_assert!(lambda_min(&pos).unwrap() >= -1e-12);
        }

        #[test]
        fn identity_function_is_identity(seed in any::<u64>(), d in 1usize..9) {
            let mut rng = crate::rng::rng_from_seed(seed);
            let s = random_symmetric(&mut rng, d);
            let same = matrix_function(&s, |x| x).unwrap();
            prop_assert!(same.sub(&s).max_abs() <= 1e-10);
        }
    }
}
