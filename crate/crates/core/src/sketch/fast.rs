//! TensorSketch applied to TT-structured design matrices and to tensor fibers.
//!
//! For core `k` the design matrix is `H_k = G_>k^T ⊗ G_<k`. Its sketch is
//! never formed from `H_k`: each other core is CountSketched along its middle
//! mode and Fourier transformed, the transformed slices are multiplied along
//! the chain to give `F S_<k G_<k` and `F S_>k G_>k^T`, their rows are
//! Kronecker-multiplied, and one inverse transform per column returns to the
//! real domain. The work is linear in the order of the tensor.

use num_complex::Complex;

use crate::error::{ensure, Error, Result};
use crate::sketch::{CountSketch, Dft, TensorSketch};
use crate::tensor::{DenseTensor, Matrix};
use crate::tt::TtTensor;
use crate::Scalar;

/// `core ×_2 (F S)`: a complex `(r1, m, r2)` tensor stored slice by slice, so
/// slice `s` is the contiguous column-major `r1 x r2` block at `s * r1 * r2`.
#[derive(Clone, Debug)]
pub struct SketchedCore<T> {
    r1: usize,
    m: usize,
    r2: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> SketchedCore<T> {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.r1, self.m, self.r2)
    }

    #[inline]
    pub fn get(&self, a: usize, s: usize, b: usize) -> Complex<T> {
        self.data[a + self.r1 * (b + self.r2 * s)]
    }

    #[inline]
    fn slice(&self, s: usize) -> &[Complex<T>] {
        let len = self.r1 * self.r2;
        &self.data[s * len..(s + 1) * len]
    }
}

/// CountSketch along mode 2 (bucket accumulation, `O(r1 n r2)`), then a
/// length-`m` DFT of every `(a, b)` fiber.
pub fn sketch_core<T: Scalar>(
    core: &DenseTensor<T>,
    cs: &CountSketch,
    dft: &Dft<T>,
) -> Result<SketchedCore<T>> {
    let m = cs.sketch_size();
    ensure!(
        dft.len() == m,
        DimensionMismatch,
        "DFT of length {} for sketch size {m}",
        dft.len()
    );
    let real = cs.apply_mode2(core)?;
    let (r1, r2) = (core.dims()[0], core.dims()[2]);
    let src = real.data();
    // one length-m block per (a, b) pair
    let mut buf = vec![Complex::new(T::zero(), T::zero()); r1 * r2 * m];
    for b in 0..r2 {
        for a in 0..r1 {
            let block = &mut buf[(a + r1 * b) * m..][..m];
            for (s, v) in block.iter_mut().enumerate() {
                v.re = src[a + r1 * (s + m * b)];
            }
        }
    }
    dft.forward(&mut buf);
    let mut data = vec![Complex::new(T::zero(), T::zero()); r1 * r2 * m];
    for ab in 0..r1 * r2 {
        let block = &buf[ab * m..][..m];
        for (s, &v) in block.iter().enumerate() {
            data[ab + r1 * r2 * s] = v;
        }
    }
    Ok(SketchedCore { r1, m, r2, data })
}

fn imag_tolerance<T: Scalar>() -> T {
    T::of(1e-9).max(T::epsilon() * T::of(1e4))
}

/// `S (G_>k^T ⊗ G_<k)` as an `m x (r_k r_{k+1})` real matrix, where `ts` is the
/// TensorSketch over all modes except `k`, in increasing mode order.
///
/// Column `a + r_k b` pairs left rank `a` with right rank `b`, matching the
/// column order of `H_k` and the rows of `core_k` matricized along mode 2 and
/// transposed.
pub fn sketch_kron_chain<T: Scalar>(
    tt: &TtTensor<T>,
    k: usize,
    ts: &TensorSketch,
    dft: &Dft<T>,
) -> Result<Matrix<T>> {
    let d = tt.order();
    ensure!(k < d, InvalidArgument, "core {k} does not exist in an order-{d} TT");
    let dims = tt.dims();
    let other: Vec<usize> = dims
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, &n)| n)
        .collect();
    ensure!(
        ts.dims() == other,
        DimensionMismatch,
        "sketch domains {:?} do not match the modes {other:?} around core {k}",
        ts.dims()
    );
    let m = ts.sketch_size();
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());

    // F S_<k G_<k, one row vector per frequency
    let mut left = vec![one; m];
    let mut width = 1usize;
    for (j, cs) in ts.modes()[..k].iter().enumerate() {
        let g = sketch_core(tt.core(j), cs, dft)?;
        let (r1, _, r2) = g.dims();
        debug_assert_eq!(r1, width);
        let mut next = vec![zero; m * r2];
        for s in 0..m {
            let row = &left[s * r1..][..r1];
            let slice = g.slice(s);
            for b in 0..r2 {
                let col = &slice[r1 * b..][..r1];
                next[s * r2 + b] = row.iter().zip(col).fold(zero, |acc, (&x, &y)| acc + x * y);
            }
        }
        left = next;
        width = r2;
    }
    let rk = width;

    // F S_>k G_>k^T, one column vector per frequency
    let mut right = vec![one; m];
    let mut height = 1usize;
    for (j, cs) in ts.modes()[k..].iter().enumerate().rev() {
        let g = sketch_core(tt.core(k + 1 + j), cs, dft)?;
        let (r1, _, r2) = g.dims();
        debug_assert_eq!(r2, height);
        let mut next = vec![zero; m * r1];
        for s in 0..m {
            let vec = &right[s * r2..][..r2];
            let slice = g.slice(s);
            for a in 0..r1 {
                let mut acc = zero;
                for (b, &v) in vec.iter().enumerate() {
                    acc += slice[a + r1 * b] * v;
                }
                next[s * r1 + a] = acc;
            }
        }
        right = next;
        height = r1;
    }
    let rk1 = height;
    let core_dims = tt.core(k).dims();
    ensure!(
        rk == core_dims[0] && rk1 == core_dims[2],
        DimensionMismatch,
        "interface ranks ({rk}, {rk1}) do not match core {k} {core_dims:?}"
    );

    // face-splitting product, then inverse DFT per column
    let cols = rk * rk1;
    let mut buf = vec![zero; m * cols];
    for b in 0..rk1 {
        for a in 0..rk {
            let column = &mut buf[(a + rk * b) * m..][..m];
            for (s, v) in column.iter_mut().enumerate() {
                *v = left[s * rk + a] * right[s * rk1 + b];
            }
        }
    }
    dft.inverse(&mut buf);

    let mut out = Matrix::zeros(m, cols);
    let mut imag = T::zero();
    for (dst, v) in out.data_mut().iter_mut().zip(&buf) {
        *dst = v.re;
        imag += v.im * v.im;
    }
    let norm = out.frobenius_norm();
    let imag = imag.sqrt();
    if imag > imag_tolerance::<T>() * norm + T::min_positive_value() {
        return Err(Error::Numerical(format!(
            "inverse DFT left an imaginary residual of {imag} against a result norm of {norm}; \
             sketch and core mode orderings disagree"
        )));
    }
    Ok(out)
}

/// `S A_(k)^T` as an `m x n_k` matrix, where `ts` covers every mode except `k`.
///
/// Each entry of `a` is read once and added with its combined sign into the
/// row given by its combined bucket; zero entries are skipped.
pub fn sketch_mode_k_fibers<T: Scalar>(
    a: &DenseTensor<T>,
    k: usize,
    ts: &TensorSketch,
) -> Result<Matrix<T>> {
    let (left, nk, right) = a.split_at_mode(k)?;
    let other: Vec<usize> = a
        .dims()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, &n)| n)
        .collect();
    ensure!(
        ts.dims() == other,
        DimensionMismatch,
        "sketch domains {:?} do not match the modes {other:?} around mode {k}",
        ts.dims()
    );
    let m = ts.sketch_size();
    let lt = ts.table::<T>(0..k);
    let rt = ts.table::<T>(k..ts.modes().len());
    debug_assert_eq!(lt.buckets.len(), left);
    debug_assert_eq!(rt.buckets.len(), right);

    let mut out = Matrix::zeros(m, nk);
    let data = a.data();
    let cols = out.data_mut();
    for ir in 0..right {
        let (hr, sr) = (rt.buckets[ir], rt.signs[ir]);
        for ik in 0..nk {
            let fiber = &data[left * (ik + nk * ir)..][..left];
            let col = &mut cols[m * ik..][..m];
            for ((&v, &hl), &sl) in fiber.iter().zip(&lt.buckets).zip(&lt.signs) {
                if v == T::zero() {
                    continue;
                }
                let row = if hl + hr >= m { hl + hr - m } else { hl + hr };
                col[row] += sl * sr * v;
            }
        }
    }
    Ok(out)
}
