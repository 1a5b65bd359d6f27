//! Single-core updates for the three solvers.
//!
//! Each returns the new core `k` given the current TT, solving the proximal
//! least-squares subproblem with prior `C = core_k(2)^T`.

use rand::Rng;

use crate::error::{ensure, Result};
use crate::sketch::{sketch_kron_chain, sketch_mode_k_fibers, CountSketch, Dft, TensorSketch};
use crate::solver::prox::prox_ls_solve_regularized;
use crate::tensor::{DenseTensor, Matrix};
use crate::tt::{check_entries, TtTensor};
use crate::Scalar;

/// `core_k(2)^T`, the `(r_k r_{k+1}) x n_k` unknown of the subproblem.
pub fn core_as_unknown<T: Scalar>(core: &DenseTensor<T>) -> Result<Matrix<T>> {
    Ok(core.matricize(1)?.transpose())
}

pub fn core_from_unknown<T: Scalar>(x: &Matrix<T>, dims: &[usize]) -> Result<DenseTensor<T>> {
    DenseTensor::fold(&x.transpose(), 1, dims.to_vec())
}

/// Dense design matrix `H_k = G_>k^T ⊗ G_<k`.
pub fn design_matrix<T: Scalar>(tt: &TtTensor<T>, k: usize, cap: usize) -> Result<Matrix<T>> {
    let gl = tt.interface_left_with_cap(k, cap)?;
    let gr = tt.interface_right_with_cap(k, cap)?;
    let (nl, rk) = (gl.rows(), gl.cols());
    let (rk1, nr) = (gr.rows(), gr.cols());
    let rows = nl.saturating_mul(nr);
    check_entries(
        "dense design matrix (use the TS solver for large tensors)",
        rows.saturating_mul(rk * rk1),
        cap,
    )?;
    let mut h = Matrix::zeros(rows, rk * rk1);
    for b in 0..rk1 {
        for a in 0..rk {
            let left = gl.col(a);
            let col = h.col_mut(a + rk * b);
            for ir in 0..nr {
                let w = gr.get(b, ir);
                for (dst, &v) in col[nl * ir..][..nl].iter_mut().zip(left) {
                    *dst = w * v;
                }
            }
        }
    }
    Ok(h)
}

/// Exact proximal ALS update on the full design matrix.
pub fn als_update<T: Scalar>(
    a: &DenseTensor<T>,
    tt: &TtTensor<T>,
    k: usize,
    sigma: T,
    cap: usize,
) -> Result<DenseTensor<T>> {
    let h = design_matrix(tt, k, cap)?;
    let b = a.matricize_t(k)?;
    let core = tt.core(k);
    let x = prox_ls_solve_regularized(&h, &b, sigma, &core_as_unknown(core)?)?;
    core_from_unknown(&x, core.dims())
}

/// TensorSketch update. `sketches` holds one CountSketch per mode; the one for
/// mode `k` is ignored.
pub fn sketched_update<T: Scalar>(
    a: &DenseTensor<T>,
    tt: &TtTensor<T>,
    k: usize,
    sketches: &[CountSketch],
    sigma: T,
    dft: &Dft<T>,
) -> Result<DenseTensor<T>> {
    ensure!(
        sketches.len() == tt.order(),
        DimensionMismatch,
        "{} sketches for an order-{} TT",
        sketches.len(),
        tt.order()
    );
    let ts = TensorSketch::excluding(sketches, k)?;
    let m = sketch_kron_chain(tt, k, &ts, dft)?;
    let b = sketch_mode_k_fibers(a, k, &ts)?;
    let core = tt.core(k);
    let x = prox_ls_solve_regularized(&m, &b, sigma, &core_as_unknown(core)?)?;
    core_from_unknown(&x, core.dims())
}

/// Row indices of `H_k` to keep: without replacement when `m <= total`,
/// otherwise with replacement.
pub fn sample_rows(total: usize, m: usize, rng: &mut impl Rng) -> Vec<usize> {
    if m <= total {
        rand::seq::index::sample(rng, total, m).into_vec()
    } else {
        (0..m).map(|_| rng.random_range(0..total)).collect()
    }
}

/// Row `iL` of `G_<k` (or, mirrored, column `iR` of `G_>k`) evaluated by
/// multiplying core slices, without forming the interface.
fn left_row<T: Scalar>(tt: &TtTensor<T>, k: usize, mut flat: usize) -> Vec<T> {
    let mut row = vec![T::one()];
    for core in &tt.cores()[..k] {
        let d = core.dims();
        let (r1, n, r2) = (d[0], d[1], d[2]);
        let i = flat % n;
        flat /= n;
        let data = core.data();
        row = (0..r2)
            .map(|b| {
                let slice = &data[r1 * (i + n * b)..][..r1];
                row.iter().zip(slice).fold(T::zero(), |s, (&x, &g)| s + x * g)
            })
            .collect();
    }
    row
}

fn right_col<T: Scalar>(tt: &TtTensor<T>, k: usize, flat: usize) -> Vec<T> {
    let cores = &tt.cores()[k + 1..];
    let mut idx = Vec::with_capacity(cores.len());
    let mut rest = flat;
    for core in cores {
        let n = core.dims()[1];
        idx.push(rest % n);
        rest /= n;
    }
    let mut col = vec![T::one()];
    for (core, &i) in cores.iter().zip(&idx).rev() {
        let d = core.dims();
        let (r1, n, r2) = (d[0], d[1], d[2]);
        let data = core.data();
        col = (0..r1)
            .map(|a| {
                (0..r2).fold(T::zero(), |s, b| s + data[a + r1 * (i + n * b)] * col[b])
            })
            .collect();
    }
    col
}

/// Row-sampling update: `rows` index `H_k` and `A_(k)^T` in the reduced
/// column-major order (modes before `k` fastest). Rows are not rescaled.
pub fn sampled_update<T: Scalar>(
    a: &DenseTensor<T>,
    tt: &TtTensor<T>,
    k: usize,
    rows: &[usize],
    sigma: T,
) -> Result<DenseTensor<T>> {
    let (nl, nk, nr) = a.split_at_mode(k)?;
    ensure!(
        a.dims() == tt.dims().as_slice(),
        DimensionMismatch,
        "tensor {:?} and TT {:?} disagree",
        a.dims(),
        tt.dims()
    );
    let core = tt.core(k);
    let (rk, rk1) = (core.dims()[0], core.dims()[2]);
    let total = nl * nr;
    let mut m = Matrix::zeros(rows.len(), rk * rk1);
    let mut b = Matrix::zeros(rows.len(), nk);
    let data = a.data();
    for (t, &row) in rows.iter().enumerate() {
        ensure!(row < total, IndexOutOfRange, "sampled row {row} exceeds {total}");
        let (il, ir) = (row % nl, row / nl);
        let gl = left_row(tt, k, il);
        let gr = right_col(tt, k, ir);
        for (bi, &wb) in gr.iter().enumerate() {
            for (ai, &wa) in gl.iter().enumerate() {
                m.set(t, ai + rk * bi, wa * wb);
            }
        }
        for ik in 0..nk {
            b.set(t, ik, data[il + nl * (ik + nk * ir)]);
        }
    }
    let x = prox_ls_solve_regularized(&m, &b, sigma, &core_as_unknown(core)?)?;
    core_from_unknown(&x, core.dims())
}
