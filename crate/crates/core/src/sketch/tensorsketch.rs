use rand::Rng;

use crate::error::{ensure, Result};
use crate::sketch::CountSketch;
use crate::tensor::{linear_index, Matrix};
use crate::tt::check_entries;
use crate::Scalar;

/// TensorSketch over an ordered list of modes, given implicitly by one
/// CountSketch per mode.
///
/// For a multi-index `(i_1, .., i_q)` the row is `(sum_j h_j(i_j)) mod m` and
/// the sign is `prod_j v_j(i_j)`. Columns follow the column-major ordering of
/// the multi-index, first mode fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSketch {
    m: usize,
    modes: Vec<CountSketch>,
}

/// Combined bucket/sign tables over a flattened index range.
pub(crate) struct HashTable<T> {
    pub buckets: Vec<usize>,
    pub signs: Vec<T>,
}

impl TensorSketch {
    pub fn new(modes: Vec<CountSketch>) -> Result<Self> {
        ensure!(!modes.is_empty(), InvalidArgument, "TensorSketch needs at least one mode");
        let m = modes[0].sketch_size();
        ensure!(
            modes.iter().all(|s| s.sketch_size() == m),
            DimensionMismatch,
            "component sketches must share one sketch size"
        );
        Ok(Self { m, modes })
    }

    pub fn random(dims: &[usize], m: usize, rng: &mut impl Rng) -> Result<Self> {
        let modes = dims
            .iter()
            .map(|&n| CountSketch::random(n, m, rng))
            .collect::<Result<_>>()?;
        Self::new(modes)
    }

    /// TensorSketch built from every component except `skip`.
    pub fn excluding(all: &[CountSketch], skip: usize) -> Result<Self> {
        ensure!(skip < all.len(), InvalidArgument, "mode {skip} does not exist");
        ensure!(all.len() >= 2, InvalidArgument, "nothing left after excluding mode {skip}");
        let modes = all
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != skip)
            .map(|(_, s)| s.clone())
            .collect();
        Self::new(modes)
    }

    #[inline]
    pub fn sketch_size(&self) -> usize {
        self.m
    }

    pub fn modes(&self) -> &[CountSketch] {
        &self.modes
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes.iter().map(CountSketch::domain).collect()
    }

    fn check_index(&self, index: &[usize]) -> Result<()> {
        linear_index(&self.dims(), index).map(|_| ())
    }

    pub fn bucket(&self, index: &[usize]) -> Result<usize> {
        self.check_index(index)?;
        Ok(self
            .modes
            .iter()
            .zip(index)
            .fold(0, |acc, (s, &i)| (acc + s.buckets()[i]) % self.m))
    }

    pub fn sign(&self, index: &[usize]) -> Result<i8> {
        self.check_index(index)?;
        Ok(self.modes.iter().zip(index).map(|(s, &i)| s.signs()[i]).product())
    }

    /// Bucket and sign for every flat index over `modes[range]`.
    pub(crate) fn table<T: Scalar>(&self, range: std::ops::Range<usize>) -> HashTable<T> {
        let mut buckets = vec![0usize];
        let mut signs = vec![T::one()];
        for s in &self.modes[range] {
            let n = s.domain();
            let mut nb = Vec::with_capacity(buckets.len() * n);
            let mut ns = Vec::with_capacity(buckets.len() * n);
            for i in 0..n {
                let (h, v) = (s.buckets()[i], s.signs()[i]);
                for (&b, &g) in buckets.iter().zip(&signs) {
                    let t = b + h;
                    nb.push(if t >= self.m { t - self.m } else { t });
                    ns.push(if v > 0 { g } else { -g });
                }
            }
            buckets = nb;
            signs = ns;
        }
        HashTable { buckets, signs }
    }

    /// Dense `m x prod(n)` matrix. Only meant for tests and small problems.
    pub fn materialize<T: Scalar>(&self, cap: usize) -> Result<Matrix<T>> {
        let cols: usize = self.dims().iter().product();
        check_entries("materialized sketch", self.m.saturating_mul(cols), cap)?;
        let t = self.table::<T>(0..self.modes.len());
        let mut s = Matrix::zeros(self.m, cols);
        for (j, (&b, &v)) in t.buckets.iter().zip(&t.signs).enumerate() {
            s.set(b, j, v);
        }
        Ok(s)
    }

    /// `S X` for a matrix with `prod(n)` rows, one pass over its entries.
    pub fn apply_rows<T: Scalar>(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let n: usize = self.dims().iter().product();
        ensure!(
            x.rows() == n,
            DimensionMismatch,
            "matrix has {} rows, sketch domain is {n}",
            x.rows()
        );
        let t = self.table::<T>(0..self.modes.len());
        let mut out = Matrix::zeros(self.m, x.cols());
        for c in 0..x.cols() {
            let src = x.col(c);
            let dst = out.col_mut(c);
            for ((&b, &g), &v) in t.buckets.iter().zip(&t.signs).zip(src) {
                dst[b] += g * v;
            }
        }
        Ok(out)
    }
}
