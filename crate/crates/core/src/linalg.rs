//! Small dense kernels on row-major `n × n` buffers.

/// In-place Cholesky factorization `A = G Gᵀ`; the lower triangle of `a`
/// receives `G`. Returns `false` if `A` is not numerically positive definite.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return false;
        }
        let g = diag.sqrt();
        a[j * n + j] = g;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / g;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            a[i * n + j] = 0.0;
        }
    }
    true
}

/// Solve `G Gᵀ x = b` in place given the factor from [`cholesky_in_place`].
pub(crate) fn cholesky_solve(g: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= g[i * n + k] * b[k];
        }
        b[i] = s / g[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= g[k * n + i] * b[k];
        }
        b[i] = s / g[i * n + i];
    }
}

/// Inverse of an SPD matrix via Cholesky, or `None` if not positive definite.
pub(crate) fn spd_inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut g = a.to_vec();
    if !cholesky_in_place(&mut g, n) {
        return None;
    }
    let mut inv = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = 0.0);
        col[j] = 1.0;
        cholesky_solve(&g, n, &mut col);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (inv[i * n + j] + inv[j * n + i]);
            inv[i * n + j] = avg;
            inv[j * n + i] = avg;
        }
    }
    Some(inv)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `xᵀ A x` for row-major symmetric `A`.
#[inline]
pub(crate) fn quad_form(a: &[f64], n: usize, x: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        total += x[i] * dot(row, x);
    }
    total
}

/// `y = A x`.
#[inline]
pub(crate) fn mat_vec(a: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    for i in 0..n {
        y[i] = dot(&a[i * n..(i + 1) * n], x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_2x2() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let inv = spd_inverse(&a, 2).unwrap();
        let det = 8.0;
        let expect = [3.0 / det, -2.0 / det, -2.0 / det, 4.0 / det];
        for (x, y) in inv.iter().zip(expect) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn indefinite_rejected() {
        let a = [1.0, 2.0, 2.0, 1.0];
        assert!(spd_inverse(&a, 2).is_none());
    }
}
