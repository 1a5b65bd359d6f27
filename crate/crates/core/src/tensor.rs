//! Dense column-major tensors and matrices.
//!
//! Every index convention in the crate derives from one rule: the first index
//! varies fastest. A multi-index `(i_1, .., i_d)` over `dims` maps to the flat
//! position `i_1 + n_1 (i_2 + n_2 (i_3 + ..))`. Indices are zero-based.

use crate::error::{ensure, Error, Result};
use crate::Scalar;

/// Flat position of `index` inside a column-major array with shape `dims`.
pub fn linear_index(dims: &[usize], index: &[usize]) -> Result<usize> {
    ensure!(
        dims.len() == index.len(),
        DimensionMismatch,
        "multi-index has {} components for an order-{} shape",
        index.len(),
        dims.len()
    );
    let mut flat = 0usize;
    let mut stride = 1usize;
    for (mode, (&i, &n)) in index.iter().zip(dims).enumerate() {
        ensure!(i < n, IndexOutOfRange, "index {i} in mode {mode} exceeds size {n}");
        flat += i * stride;
        stride *= n;
    }
    Ok(flat)
}

/// Inverse of [`linear_index`].
pub fn multi_index(dims: &[usize], flat: usize) -> Result<Vec<usize>> {
    let total: usize = dims.iter().product();
    ensure!(flat < total, IndexOutOfRange, "flat index {flat} exceeds size {total}");
    let mut rest = flat;
    Ok(dims
        .iter()
        .map(|&n| {
            let i = rest % n;
            rest /= n;
            i
        })
        .collect())
}

/// Column-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = T::one();
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        ensure!(
            data.len() == rows * cols,
            DimensionMismatch,
            "{} values for a {rows}x{cols} matrix",
            data.len()
        );
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; convenient for literals in tests.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            ensure!(row.len() == ncols, DimensionMismatch, "ragged row {i}");
            for (j, &v) in row.iter().enumerate() {
                m.data[i + j * nrows] = v;
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.rows] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        ensure!(
            self.cols == rhs.rows,
            DimensionMismatch,
            "cannot multiply {}x{} by {}x{}",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (l, &b) in rhs.col(j).iter().enumerate() {
                if b == T::zero() {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.col(l)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * rhs`, computed from contiguous column dot products.
    pub fn t_matmul(&self, rhs: &Self) -> Result<Self> {
        ensure!(
            self.rows == rhs.rows,
            DimensionMismatch,
            "cannot form A^T B with A {}x{} and B {}x{}",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
        Ok(Self::from_fn(self.cols, rhs.cols, |i, j| {
            dot(self.col(i), rhs.col(j))
        }))
    }

    /// `self^T * self`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = dot(self.col(i), self.col(j));
                g.data[i + j * n] = v;
                g.data[j + i * n] = v;
            }
        }
        g
    }

    pub fn frobenius_norm(&self) -> T {
        sum_squares(&self.data).sqrt()
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        ensure!(
            self.rows == rhs.rows && self.cols == rhs.cols,
            DimensionMismatch,
            "cannot subtract {}x{} and {}x{}",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (p, q) = (rhs.rows, rhs.cols);
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self.get(i / p, j / q) * rhs.get(i % p, j % q)
        })
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub(crate) fn sum_squares<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc + x * x)
}

/// Order-`d` dense tensor with column-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor<T> {
    dims: Vec<usize>,
    data: Vec<T>,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    ensure!(!dims.is_empty(), InvalidArgument, "tensor order must be at least 1");
    ensure!(
        dims.iter().all(|&n| n >= 1),
        InvalidArgument,
        "every dimension must be positive, got {dims:?}"
    );
    dims.iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::InvalidArgument(format!("element count of {dims:?} overflows")))
}

impl<T: Scalar> DenseTensor<T> {
    pub fn new(dims: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let len = check_dims(&dims)?;
        ensure!(
            data.len() == len,
            DimensionMismatch,
            "{} values for shape {dims:?} ({len} entries)",
            data.len()
        );
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = check_dims(&dims)?;
        Ok(Self {
            dims,
            data: vec![T::zero(); len],
        })
    }

    /// Fills the tensor by evaluating `f` on every multi-index, in storage order.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let len = check_dims(&dims)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            for (i, &n) in idx.iter_mut().zip(&dims) {
                *i += 1;
                if *i < n {
                    break;
                }
                *i = 0;
            }
        }
        Ok(Self { dims, data })
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> Result<T> {
        Ok(self.data[linear_index(&self.dims, index)?])
    }

    pub fn frobenius_norm(&self) -> T {
        sum_squares(&self.data).sqrt()
    }

    /// Same storage, new shape.
    pub fn reshape(self, dims: Vec<usize>) -> Result<Self> {
        let len = check_dims(&dims)?;
        ensure!(
            len == self.data.len(),
            DimensionMismatch,
            "cannot reshape {:?} into {dims:?}",
            self.dims
        );
        Ok(Self {
            dims,
            data: self.data,
        })
    }

    /// `(left, n_k, right)` extents around mode `k`.
    pub(crate) fn split_at_mode(&self, k: usize) -> Result<(usize, usize, usize)> {
        ensure!(
            k < self.dims.len(),
            InvalidArgument,
            "mode {k} is invalid for an order-{} tensor",
            self.dims.len()
        );
        let left = self.dims[..k].iter().product();
        let right = self.dims[k + 1..].iter().product();
        Ok((left, self.dims[k], right))
    }

    /// Mode-`k` matricization: an `n_k x prod(n_i, i != k)` matrix whose
    /// columns follow the remaining modes in column-major order.
    pub fn matricize(&self, k: usize) -> Result<Matrix<T>> {
        let (left, nk, right) = self.split_at_mode(k)?;
        let mut out = Matrix::zeros(nk, left * right);
        for ir in 0..right {
            for ik in 0..nk {
                let src = &self.data[left * (ik + nk * ir)..][..left];
                for (il, &v) in src.iter().enumerate() {
                    out.data[ik + nk * (il + left * ir)] = v;
                }
            }
        }
        Ok(out)
    }

    /// Transposed mode-`k` matricization, `A_(k)^T`, without the intermediate.
    pub fn matricize_t(&self, k: usize) -> Result<Matrix<T>> {
        let (left, nk, right) = self.split_at_mode(k)?;
        let rows = left * right;
        let mut out = Matrix::zeros(rows, nk);
        for ir in 0..right {
            for ik in 0..nk {
                let src = &self.data[left * (ik + nk * ir)..][..left];
                out.data[ik * rows + left * ir..][..left].copy_from_slice(src);
            }
        }
        Ok(out)
    }

    /// Inverse of [`DenseTensor::matricize`] for the given full shape.
    pub fn fold(mat: &Matrix<T>, k: usize, dims: Vec<usize>) -> Result<Self> {
        let mut out = Self::zeros(dims)?;
        let (left, nk, right) = out.split_at_mode(k)?;
        ensure!(
            mat.rows == nk && mat.cols == left * right,
            DimensionMismatch,
            "a {}x{} matrix does not fold along mode {k} into {:?}",
            mat.rows,
            mat.cols,
            out.dims
        );
        for ir in 0..right {
            for ik in 0..nk {
                for il in 0..left {
                    out.data[il + left * (ik + nk * ir)] = mat.data[ik + nk * (il + left * ir)];
                }
            }
        }
        Ok(out)
    }

    /// `self ×_k m`: contracts mode `k` with the columns of `m`.
    pub fn mode_product(&self, k: usize, m: &Matrix<T>) -> Result<Self> {
        let (left, nk, right) = self.split_at_mode(k)?;
        ensure!(
            m.cols == nk,
            DimensionMismatch,
            "mode-{k} product needs {nk} matrix columns, got {}",
            m.cols
        );
        let p = m.rows;
        let mut dims = self.dims.clone();
        dims[k] = p;
        let mut data = vec![T::zero(); left * p * right];
        for ir in 0..right {
            for ik in 0..nk {
                let src = &self.data[left * (ik + nk * ir)..][..left];
                for j in 0..p {
                    let w = m.get(j, ik);
                    if w == T::zero() {
                        continue;
                    }
                    let dst = &mut data[left * (j + p * ir)..][..left];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
        Ok(Self { dims, data })
    }

    fn expect_order3(&self) -> Result<(usize, usize, usize)> {
        ensure!(
            self.dims.len() == 3,
            InvalidArgument,
            "expected an order-3 tensor, got shape {:?}",
            self.dims
        );
        Ok((self.dims[0], self.dims[1], self.dims[2]))
    }

    /// Left unfolding of an order-3 tensor: `(r1 n) x r2`. Storage is shared
    /// with the tensor, so this is a copy-free reinterpretation.
    pub fn left_unfold(&self) -> Result<Matrix<T>> {
        let (r1, n, r2) = self.expect_order3()?;
        Matrix::from_col_major(r1 * n, r2, self.data.clone())
    }

    /// Right unfolding of an order-3 tensor: `r1 x (n r2)`.
    pub fn right_unfold(&self) -> Result<Matrix<T>> {
        let (r1, n, r2) = self.expect_order3()?;
        Matrix::from_col_major(r1, n * r2, self.data.clone())
    }

    pub fn from_left_unfold(mat: Matrix<T>, r1: usize, n: usize, r2: usize) -> Result<Self> {
        ensure!(
            mat.rows == r1 * n && mat.cols == r2,
            DimensionMismatch,
            "{}x{} is not the left unfolding of ({r1},{n},{r2})",
            mat.rows,
            mat.cols
        );
        Self::new(vec![r1, n, r2], mat.data)
    }

    pub fn from_right_unfold(mat: Matrix<T>, r1: usize, n: usize, r2: usize) -> Result<Self> {
        ensure!(
            mat.rows == r1 && mat.cols == n * r2,
            DimensionMismatch,
            "{}x{} is not the right unfolding of ({r1},{n},{r2})",
            mat.rows,
            mat.cols
        );
        Self::new(vec![r1, n, r2], mat.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(dims: &[usize]) -> DenseTensor<f64> {
        let n: usize = dims.iter().product();
        DenseTensor::new(dims.to_vec(), (1..=n).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn linear_index_examples() {
        // (1,1),(2,1),(1,2),(2,2) in one-based notation
        let dims = [2, 2];
        assert_eq!(linear_index(&dims, &[0, 0]).unwrap(), 0);
        assert_eq!(linear_index(&dims, &[1, 0]).unwrap(), 1);
        assert_eq!(linear_index(&dims, &[0, 1]).unwrap(), 2);
        assert_eq!(linear_index(&dims, &[1, 1]).unwrap(), 3);
        assert_eq!(linear_index(&[7], &[4]).unwrap(), 4);
        // one-based (2,3,1) -> 6
        assert_eq!(linear_index(&[2, 3, 2], &[1, 2, 0]).unwrap() + 1, 6);
    }

    #[test]
    fn linear_index_rejects_out_of_range() {
        assert!(linear_index(&[2, 2], &[2, 0]).unwrap_err().is_domain());
        assert!(linear_index(&[2, 2], &[0]).unwrap_err().is_domain());
        assert!(multi_index(&[2, 2], 4).is_err());
    }

    #[test]
    fn linear_multi_roundtrip_exhaustive() {
        for dims in [vec![3], vec![4, 5], vec![2, 3, 4], vec![3, 1, 2, 5], vec![10, 10, 10, 10]] {
            let total: usize = dims.iter().product();
            for flat in 0..total {
                let idx = multi_index(&dims, flat).unwrap();
                assert_eq!(linear_index(&dims, &idx).unwrap(), flat);
            }
        }
    }

    #[test]
    fn matricize_examples() {
        let a = seq(&[2, 2]);
        let m = a.matricize(0).unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 3.0], [2.0, 4.0]]).unwrap());

        let a = seq(&[2, 2, 2]);
        let m2 = a.matricize(1).unwrap();
        assert_eq!(
            m2,
            Matrix::from_rows(&[[1.0, 2.0, 5.0, 6.0], [3.0, 4.0, 7.0, 8.0]]).unwrap()
        );
        let m3 = a.matricize(2).unwrap();
        assert_eq!(
            m3,
            Matrix::from_rows(&[[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]]).unwrap()
        );
        assert_eq!(a.matricize_t(1).unwrap(), m2.transpose());
        assert!(a.matricize(3).unwrap_err().is_domain());
    }

    #[test]
    fn mode_product_examples() {
        let a = seq(&[2, 2, 2]);
        let id = Matrix::identity(2);
        assert_eq!(a.mode_product(1, &id).unwrap(), a);

        let ones = Matrix::from_rows(&[[1.0, 1.0]]).unwrap();
        let s = a.mode_product(2, &ones).unwrap();
        assert_eq!(s.dims(), &[2, 2, 1]);
        // [[6,10],[8,12]]
        assert_eq!(s.get(&[0, 0, 0]).unwrap(), 6.0);
        assert_eq!(s.get(&[0, 1, 0]).unwrap(), 10.0);
        assert_eq!(s.get(&[1, 0, 0]).unwrap(), 8.0);
        assert_eq!(s.get(&[1, 1, 0]).unwrap(), 12.0);

        let bad = Matrix::<f64>::identity(3);
        assert!(a.mode_product(0, &bad).unwrap_err().is_domain());
    }

    #[test]
    fn unfoldings() {
        let g = seq(&[1, 5, 1]);
        assert_eq!((g.left_unfold().unwrap().rows(), g.left_unfold().unwrap().cols()), (5, 1));
        assert_eq!((g.right_unfold().unwrap().rows(), g.right_unfold().unwrap().cols()), (1, 5));

        let g = seq(&[2, 2, 2]);
        let l = g.left_unfold().unwrap();
        assert_eq!(
            l,
            Matrix::from_rows(&[[1.0, 5.0], [2.0, 6.0], [3.0, 7.0], [4.0, 8.0]]).unwrap()
        );
        // index formulas
        let g = seq(&[2, 3, 4]);
        let r = g.right_unfold().unwrap();
        for i1 in 0..2 {
            for i2 in 0..3 {
                for i3 in 0..4 {
                    let v = g.get(&[i1, i2, i3]).unwrap();
                    assert_eq!(r.get(i1, i2 + i3 * 3), v);
                    assert_eq!(g.left_unfold().unwrap().get(i1 + i2 * 2, i3), v);
                }
            }
        }
        assert_eq!(DenseTensor::from_left_unfold(g.left_unfold().unwrap(), 2, 3, 4).unwrap(), g);
        assert_eq!(DenseTensor::from_right_unfold(r, 2, 3, 4).unwrap(), g);
        assert!(seq(&[2, 2]).left_unfold().unwrap_err().is_domain());
    }

    #[test]
    fn norms_and_reshape() {
        let ones = DenseTensor::new(vec![3, 4], vec![1.0f64; 12]).unwrap();
        assert!((ones.frobenius_norm() - 12f64.sqrt()).abs() < 1e-15);
        assert_eq!(DenseTensor::<f64>::zeros(vec![2, 2]).unwrap().frobenius_norm(), 0.0);

        let a = seq(&[2, 2, 2]).reshape(vec![4, 2]).unwrap();
        // one-based (3,2) -> 7
        assert_eq!(a.get(&[2, 1]).unwrap(), 7.0);
        let b = seq(&[2, 3]).reshape(vec![3, 2]).unwrap();
        assert_eq!(b.data(), seq(&[2, 3]).data());
        assert!(seq(&[4]).reshape(vec![3]).unwrap_err().is_domain());
    }

    #[test]
    fn invalid_shapes() {
        assert!(DenseTensor::<f64>::zeros(vec![]).is_err());
        assert!(DenseTensor::<f64>::zeros(vec![2, 0]).is_err());
        assert!(DenseTensor::new(vec![2, 2], vec![1.0f64; 3]).is_err());
    }
}
