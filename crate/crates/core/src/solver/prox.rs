use crate::error::{ensure, Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::tensor::Matrix;
use crate::Scalar;

/// Minimizer of `½‖M X − B‖² + (σ/2)‖X − C‖²`, i.e.
/// `X = (MᵀM + σI)⁻¹ (MᵀB + σC)`, by Cholesky on the `s x s` normal matrix.
///
/// With `sigma = 0` a rank-deficient `M` yields [`Error::Singular`].
pub fn prox_ls_solve<T: Scalar>(
    m: &Matrix<T>,
    b: &Matrix<T>,
    sigma: T,
    c: &Matrix<T>,
) -> Result<Matrix<T>> {
    let (normal, rhs) = normal_equations(m, b, sigma, c)?;
    solve(&normal, rhs)
}

/// Like [`prox_ls_solve`], but when `sigma = 0` and the normal matrix is
/// singular, retries once with `1e-12 * trace / s` added to the diagonal.
pub(crate) fn prox_ls_solve_regularized<T: Scalar>(
    m: &Matrix<T>,
    b: &Matrix<T>,
    sigma: T,
    c: &Matrix<T>,
) -> Result<Matrix<T>> {
    let (mut normal, rhs) = normal_equations(m, b, sigma, c)?;
    match solve(&normal, rhs.clone()) {
        Err(Error::Singular) if sigma == T::zero() => {
            let s = normal.rows();
            let trace = (0..s).map(|i| normal.get(i, i)).fold(T::zero(), |a, v| a + v);
            let mut jitter = T::of(1e-12) * trace / T::of_usize(s);
            if !(jitter > T::zero()) {
                jitter = T::min_positive_value().sqrt();
            }
            log::warn!("singular normal matrix with sigma = 0; adding jitter {jitter}");
            for i in 0..s {
                normal.set(i, i, normal.get(i, i) + jitter);
            }
            solve(&normal, rhs)
        }
        other => other,
    }
}

fn normal_equations<T: Scalar>(
    m: &Matrix<T>,
    b: &Matrix<T>,
    sigma: T,
    c: &Matrix<T>,
) -> Result<(Matrix<T>, Matrix<T>)> {
    ensure!(
        sigma >= T::zero() && sigma.is_finite(),
        InvalidArgument,
        "sigma must be a finite nonnegative number, got {sigma}"
    );
    ensure!(
        m.rows() == b.rows(),
        DimensionMismatch,
        "design has {} rows, right side has {}",
        m.rows(),
        b.rows()
    );
    ensure!(
        c.rows() == m.cols() && c.cols() == b.cols(),
        DimensionMismatch,
        "prior is {}x{}, expected {}x{}",
        c.rows(),
        c.cols(),
        m.cols(),
        b.cols()
    );
    let mut normal = m.gram();
    let mut rhs = m.t_matmul(b)?;
    if sigma > T::zero() {
        for i in 0..normal.rows() {
            normal.set(i, i, normal.get(i, i) + sigma);
        }
        for (r, &p) in rhs.data_mut().iter_mut().zip(c.data()) {
            *r += sigma * p;
        }
    }
    Ok((normal, rhs))
}

fn solve<T: Scalar>(normal: &Matrix<T>, mut rhs: Matrix<T>) -> Result<Matrix<T>> {
    let l = cholesky(normal)?;
    cholesky_solve(&l, &mut rhs)?;
    Ok(rhs)
}
