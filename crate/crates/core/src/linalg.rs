//! Small dense factorizations: Householder QR and Cholesky.

use crate::error::{ensure, Error, Result};
use crate::tensor::{dot, Matrix};
use crate::Scalar;

/// Thin QR of a `p x r` matrix with `p >= r`.
///
/// `R` has a nonnegative diagonal. Columns whose remaining part vanishes get no
/// reflector, so the QR of a zero matrix is `Q = I[:, ..r]`, `R = 0`.
pub fn qr<T: Scalar>(a: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let (p, r) = (a.rows(), a.cols());
    ensure!(p >= r, InvalidArgument, "thin QR needs rows >= cols, got {p}x{r}");
    let scale = a.frobenius_norm();
    let tiny = scale * T::epsilon();
    let mut work = a.clone();
    let mut reflectors: Vec<Option<Vec<T>>> = Vec::with_capacity(r);

    for j in 0..r {
        let x = &work.col(j)[j..];
        let norm = dot(x, x).sqrt();
        if norm <= tiny {
            reflectors.push(None);
            continue;
        }
        let alpha = if x[0] >= T::zero() { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm = dot(&v, &v).sqrt();
        for e in &mut v {
            *e /= vnorm;
        }
        for c in j..r {
            let col = &mut work.col_mut(c)[j..];
            let w = dot(&v, col);
            let w2 = w + w;
            for (e, &vi) in col.iter_mut().zip(&v) {
                *e -= w2 * vi;
            }
        }
        reflectors.push(Some(v));
    }

    let mut rmat = Matrix::from_fn(r, r, |i, j| if i <= j { work.get(i, j) } else { T::zero() });
    let mut q = Matrix::from_fn(p, r, |i, j| if i == j { T::one() } else { T::zero() });
    for (j, v) in reflectors.iter().enumerate().rev() {
        let Some(v) = v else { continue };
        for c in 0..r {
            let col = &mut q.col_mut(c)[j..];
            let w = dot(v, col);
            let w2 = w + w;
            for (e, &vi) in col.iter_mut().zip(v) {
                *e -= w2 * vi;
            }
        }
    }

    for j in 0..r {
        if rmat.get(j, j) < T::zero() {
            for c in j..r {
                rmat.set(j, c, -rmat.get(j, c));
            }
            for e in q.col_mut(j) {
                *e = -*e;
            }
        }
    }
    Ok((q, rmat))
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
///
/// Fails with [`Error::Singular`] when a pivot drops below
/// `n * eps * max(diag)`.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    ensure!(a.cols() == n, DimensionMismatch, "Cholesky needs a square matrix");
    let max_diag = (0..n).map(|i| a.get(i, i)).fold(T::zero(), T::max);
    let floor = max_diag * T::epsilon() * T::of_usize(n.max(1));
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > floor) {
            return Err(Error::Singular);
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    Ok(l)
}

/// Solves `L L^T X = B` in place given the lower factor `L`.
pub fn cholesky_solve<T: Scalar>(l: &Matrix<T>, b: &mut Matrix<T>) -> Result<()> {
    let n = l.rows();
    ensure!(b.rows() == n, DimensionMismatch, "right-hand side has {} rows, expected {n}", b.rows());
    for c in 0..b.cols() {
        let x = b.col_mut(c);
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= l.get(i, k) * x[k];
            }
            x[i] = s / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= l.get(k, i) * x[k];
            }
            x[i] = s / l.get(i, i);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>() - 0.5)
    }

    fn orth_residual(q: &Matrix<f64>) -> f64 {
        q.gram().sub(&Matrix::identity(q.cols())).unwrap().frobenius_norm()
    }

    #[test]
    fn qr_reconstructs_with_positive_diagonal() {
        for (p, r, seed) in [(5, 3, 1), (4, 4, 2), (10, 1, 3), (1, 1, 4)] {
            let a = random(p, r, seed);
            let (q, rm) = qr(&a).unwrap();
            assert!(orth_residual(&q) < 1e-13);
            assert!(q.matmul(&rm).unwrap().sub(&a).unwrap().frobenius_norm() < 1e-13);
            for j in 0..r {
                assert!(rm.get(j, j) >= 0.0);
                for i in j + 1..r {
                    assert_eq!(rm.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn qr_of_zero_is_identity_columns() {
        let (q, r) = qr(&Matrix::<f64>::zeros(4, 2)).unwrap();
        assert_eq!(q, Matrix::from_fn(4, 2, |i, j| if i == j { 1.0 } else { 0.0 }));
        assert_eq!(r, Matrix::zeros(2, 2));
    }

    #[test]
    fn qr_of_rank_deficient_is_orthonormal() {
        let mut a = random(6, 3, 9);
        let c0 = a.col(0).to_vec();
        a.col_mut(2).copy_from_slice(&c0);
        let (q, r) = qr(&a).unwrap();
        assert!(orth_residual(&q) < 1e-13);
        assert!(q.matmul(&r).unwrap().sub(&a).unwrap().frobenius_norm() < 1e-13);
    }

    #[test]
    fn qr_rejects_wide() {
        assert!(qr(&Matrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn cholesky_solves_spd() {
        let m = random(8, 4, 5);
        let mut g = m.gram();
        for i in 0..4 {
            g.set(i, i, g.get(i, i) + 0.1);
        }
        let b = random(4, 2, 6);
        let l = cholesky(&g).unwrap();
        let mut x = b.clone();
        cholesky_solve(&l, &mut x).unwrap();
        assert!(g.matmul(&x).unwrap().sub(&b).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn cholesky_detects_singular() {
        let m = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&m), Err(Error::Singular)));
        assert!(matches!(cholesky(&Matrix::<f64>::zeros(3, 3)), Err(Error::Singular)));
    }
}
