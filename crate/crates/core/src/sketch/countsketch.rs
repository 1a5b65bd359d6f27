use rand::Rng;

use crate::error::{ensure, Result};
use crate::rng::{substream, Stream};
use crate::sketch::hash::PolyHash;
use crate::tensor::{DenseTensor, Matrix};
use crate::Scalar;

/// CountSketch `S = Ω D` of size `m x n`: column `i` holds `signs[i]` in row
/// `buckets[i]` and zeros elsewhere. Tables are zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountSketch {
    m: usize,
    buckets: Vec<usize>,
    signs: Vec<i8>,
}

impl CountSketch {
    /// Tabulates a degree-2 bucket hash and a degree-3 sign hash drawn from `rng`.
    pub fn random(n: usize, m: usize, rng: &mut impl Rng) -> Result<Self> {
        ensure!(n >= 1 && m >= 1, InvalidArgument, "CountSketch needs n, m >= 1");
        let h = PolyHash::random(2, rng);
        let v = PolyHash::random(3, rng);
        let buckets = (0..n as u64).map(|i| h.bucket(i, m)).collect();
        let signs = (0..n as u64).map(|i| v.sign(i)).collect();
        Ok(Self { m, buckets, signs })
    }

    pub fn new(n: usize, m: usize, seed: u64) -> Result<Self> {
        Self::random(n, m, &mut substream(seed, Stream::Sketch))
    }

    pub fn from_tables(m: usize, buckets: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        ensure!(m >= 1, InvalidArgument, "sketch size must be positive");
        ensure!(
            !buckets.is_empty() && buckets.len() == signs.len(),
            DimensionMismatch,
            "{} buckets and {} signs",
            buckets.len(),
            signs.len()
        );
        ensure!(buckets.iter().all(|&b| b < m), IndexOutOfRange, "bucket outside [0, {m})");
        ensure!(
            signs.iter().all(|&s| s == 1 || s == -1),
            InvalidArgument,
            "signs must be +1 or -1"
        );
        Ok(Self { m, buckets, signs })
    }

    #[inline]
    pub fn sketch_size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn domain(&self) -> usize {
        self.buckets.len()
    }

    pub fn buckets(&self) -> &[usize] {
        &self.buckets
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn apply<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        ensure!(
            x.len() == self.domain(),
            DimensionMismatch,
            "vector of length {} for a sketch over {}",
            x.len(),
            self.domain()
        );
        let mut out = vec![T::zero(); self.m];
        for ((&b, &s), &v) in self.buckets.iter().zip(&self.signs).zip(x) {
            out[b] += if s > 0 { v } else { -v };
        }
        Ok(out)
    }

    pub fn materialize<T: Scalar>(&self) -> Matrix<T> {
        let mut s = Matrix::zeros(self.m, self.domain());
        for (i, (&b, &v)) in self.buckets.iter().zip(&self.signs).enumerate() {
            s.set(b, i, T::of(v as f64));
        }
        s
    }

    /// `core ×_2 S` for an order-3 core `(r1, n, r2)`, by signed bucket accumulation.
    pub fn apply_mode2<T: Scalar>(&self, core: &DenseTensor<T>) -> Result<DenseTensor<T>> {
        ensure!(core.order() == 3, InvalidArgument, "expected an order-3 core");
        let d = core.dims();
        let (r1, n, r2) = (d[0], d[1], d[2]);
        ensure!(
            n == self.domain(),
            DimensionMismatch,
            "core mode size {n} does not match sketch domain {}",
            self.domain()
        );
        let m = self.m;
        let mut out = vec![T::zero(); r1 * m * r2];
        let src = core.data();
        for b in 0..r2 {
            for i in 0..n {
                let fiber = &src[r1 * (i + n * b)..][..r1];
                let dst = &mut out[r1 * (self.buckets[i] + m * b)..][..r1];
                if self.signs[i] > 0 {
                    dst.iter_mut().zip(fiber).for_each(|(o, &v)| *o += v);
                } else {
                    dst.iter_mut().zip(fiber).for_each(|(o, &v)| *o -= v);
                }
            }
        }
        DenseTensor::new(vec![r1, m, r2], out)
    }
}
