//! Tensor-train format.
//!
//! Core `k` has shape `(r_k, n_k, r_{k+1})` with `r_0 = r_d = 1`; entry
//! `A(i_1, .., i_d)` is the matrix product of the middle-index slices.

use crate::error::{ensure, Error, Result};
use crate::linalg::qr;
use crate::rng::{standard_normal, substream, Stream};
use crate::tensor::{DenseTensor, Matrix};
use crate::Scalar;

/// Default bound on the number of entries any full materialization may allocate.
pub const DEFAULT_ENTRY_CAP: usize = 1 << 27;

pub(crate) fn check_entries(what: &str, requested: usize, cap: usize) -> Result<()> {
    if requested > cap {
        return Err(Error::ResourceLimit {
            what: what.to_owned(),
            requested,
            cap,
        });
    }
    Ok(())
}

/// Rank chain `(1, r, .., r, 1)` for an order-`d` tensor.
pub fn uniform_ranks(d: usize, r: usize) -> Vec<usize> {
    let mut ranks = vec![r; d + 1];
    ranks[0] = 1;
    ranks[d] = 1;
    ranks
}

/// Validates a rank chain `(r_0, .., r_d)` against mode sizes.
///
/// With `feasible`, also requires that every core can be orthogonalized in
/// both directions, i.e. `r_{k+1} <= r_k n_k` and `r_k <= n_k r_{k+1}`.
pub fn check_rank_chain(dims: &[usize], ranks: &[usize], feasible: bool) -> Result<()> {
    ensure!(!dims.is_empty(), InvalidArgument, "a TT needs at least one mode");
    ensure!(
        ranks.len() == dims.len() + 1,
        InvalidArgument,
        "rank chain {ranks:?} needs {} entries for {} modes",
        dims.len() + 1,
        dims.len()
    );
    ensure!(
        ranks[0] == 1 && ranks[dims.len()] == 1,
        InvalidArgument,
        "boundary ranks must be 1, got {ranks:?}"
    );
    ensure!(
        ranks.iter().all(|&r| r >= 1) && dims.iter().all(|&n| n >= 1),
        InvalidArgument,
        "ranks and dims must be positive"
    );
    if feasible {
        for (k, &n) in dims.iter().enumerate() {
            ensure!(
                ranks[k + 1] <= ranks[k] * n && ranks[k] <= n * ranks[k + 1],
                InvalidArgument,
                "rank chain {ranks:?} is not attainable for dims {dims:?} at core {k}"
            );
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TtTensor<T> {
    cores: Vec<DenseTensor<T>>,
}

impl<T: Scalar> TtTensor<T> {
    pub fn new(cores: Vec<DenseTensor<T>>) -> Result<Self> {
        ensure!(!cores.is_empty(), InvalidArgument, "a TT needs at least one core");
        for (k, c) in cores.iter().enumerate() {
            ensure!(c.order() == 3, InvalidArgument, "core {k} has order {}", c.order());
        }
        ensure!(
            cores[0].dims()[0] == 1 && cores[cores.len() - 1].dims()[2] == 1,
            InvalidArgument,
            "boundary ranks must be 1"
        );
        for k in 1..cores.len() {
            ensure!(
                cores[k - 1].dims()[2] == cores[k].dims()[0],
                DimensionMismatch,
                "cores {} and {k} disagree on their shared rank",
                k - 1
            );
        }
        Ok(Self { cores })
    }

    pub fn zeros(dims: &[usize], ranks: &[usize]) -> Result<Self> {
        check_rank_chain(dims, ranks, false)?;
        let cores = dims
            .iter()
            .enumerate()
            .map(|(k, &n)| DenseTensor::zeros(vec![ranks[k], n, ranks[k + 1]]))
            .collect::<Result<_>>()?;
        Ok(Self { cores })
    }

    /// Cores with i.i.d. standard normal entries drawn from `seed`.
    pub fn random(dims: &[usize], ranks: &[usize], seed: u64) -> Result<Self> {
        check_rank_chain(dims, ranks, false)?;
        let mut rng = substream(seed, Stream::Init);
        let cores = dims
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let len = ranks[k] * n * ranks[k + 1];
                let data = (0..len).map(|_| T::of(standard_normal(&mut rng))).collect();
                DenseTensor::new(vec![ranks[k], n, ranks[k + 1]], data)
            })
            .collect::<Result<_>>()?;
        Ok(Self { cores })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn cores(&self) -> &[DenseTensor<T>] {
        &self.cores
    }

    pub fn core(&self, k: usize) -> &DenseTensor<T> {
        &self.cores[k]
    }

    /// Replaces core `k`; the new core must keep the shape.
    pub fn set_core(&mut self, k: usize, core: DenseTensor<T>) -> Result<()> {
        ensure!(k < self.cores.len(), InvalidArgument, "core {k} does not exist");
        ensure!(
            core.dims() == self.cores[k].dims(),
            DimensionMismatch,
            "core {k} must keep shape {:?}, got {:?}",
            self.cores[k].dims(),
            core.dims()
        );
        self.cores[k] = core;
        Ok(())
    }

    pub fn into_cores(self) -> Vec<DenseTensor<T>> {
        self.cores
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dims()[1]).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.cores.iter().map(|c| c.dims()[0]).collect();
        r.push(1);
        r
    }

    /// Number of stored scalars, `sum_k r_k n_k r_{k+1}`.
    pub fn storage(&self) -> usize {
        self.cores.iter().map(|c| c.len()).sum()
    }

    pub fn entry(&self, index: &[usize]) -> Result<T> {
        ensure!(
            index.len() == self.cores.len(),
            DimensionMismatch,
            "multi-index has {} components for an order-{} TT",
            index.len(),
            self.cores.len()
        );
        let mut row = vec![T::one()];
        for (k, (core, &i)) in self.cores.iter().zip(index).enumerate() {
            let d = core.dims();
            let (r1, n, r2) = (d[0], d[1], d[2]);
            ensure!(i < n, IndexOutOfRange, "index {i} in mode {k} exceeds size {n}");
            let data = core.data();
            row = (0..r2)
                .map(|b| {
                    let slice = &data[r1 * (i + n * b)..][..r1];
                    row.iter().zip(slice).fold(T::zero(), |s, (&x, &g)| s + x * g)
                })
                .collect();
        }
        Ok(row[0])
    }

    pub fn full(&self) -> Result<DenseTensor<T>> {
        self.full_with_cap(DEFAULT_ENTRY_CAP)
    }

    pub fn full_with_cap(&self, cap: usize) -> Result<DenseTensor<T>> {
        let total = self
            .dims()
            .iter()
            .try_fold(1usize, |a, &n| a.checked_mul(n))
            .unwrap_or(usize::MAX);
        check_entries("full tensor", total, cap)?;
        let chain = self.prefix_chain(self.cores.len(), cap)?;
        DenseTensor::new(self.dims(), chain.into_data())
    }

    /// Reshaped product of cores `0..k`: a `prod(n_i, i<k) x r_k` matrix.
    fn prefix_chain(&self, k: usize, cap: usize) -> Result<Matrix<T>> {
        let mut acc = Matrix::identity(1);
        for core in &self.cores[..k] {
            let d = core.dims();
            let rows = acc.rows();
            check_entries("left interface", rows * d[1] * d[2], cap)?;
            let prod = acc.matmul(&core.right_unfold()?)?;
            acc = Matrix::from_col_major(rows * d[1], d[2], prod.into_data())?;
        }
        Ok(acc)
    }

    /// Left interface `G_<k`: cores before `k` contracted, `prod(n_i, i<k) x r_k`.
    pub fn interface_left(&self, k: usize) -> Result<Matrix<T>> {
        self.interface_left_with_cap(k, DEFAULT_ENTRY_CAP)
    }

    pub fn interface_left_with_cap(&self, k: usize, cap: usize) -> Result<Matrix<T>> {
        ensure!(k < self.cores.len(), InvalidArgument, "core {k} does not exist");
        self.prefix_chain(k, cap)
    }

    /// Right interface `G_>k`: cores after `k` contracted, `r_{k+1} x prod(n_i, i>k)`.
    pub fn interface_right(&self, k: usize) -> Result<Matrix<T>> {
        self.interface_right_with_cap(k, DEFAULT_ENTRY_CAP)
    }

    pub fn interface_right_with_cap(&self, k: usize, cap: usize) -> Result<Matrix<T>> {
        ensure!(k < self.cores.len(), InvalidArgument, "core {k} does not exist");
        let mut acc = Matrix::identity(1);
        for core in self.cores[k + 1..].iter().rev() {
            let d = core.dims();
            let cols = acc.cols();
            check_entries("right interface", d[0] * d[1] * cols, cap)?;
            let prod = core.left_unfold()?.matmul(&acc)?;
            acc = Matrix::from_col_major(d[0], d[1] * cols, prod.into_data())?;
        }
        Ok(acc)
    }

    /// Gauge transform making cores `1..d` right-orthogonal (`G^R G^R^T = I`);
    /// the represented tensor is unchanged.
    pub fn right_orthogonalize(&self) -> Result<Self> {
        let mut out = self.clone();
        for k in (1..out.cores.len()).rev() {
            let d = out.cores[k].dims().to_vec();
            let (r1, n, r2) = (d[0], d[1], d[2]);
            ensure!(
                r1 <= n * r2,
                InvalidArgument,
                "core {k} with shape {d:?} cannot be right-orthogonalized"
            );
            let (q, r) = qr(&out.cores[k].right_unfold()?.transpose())?;
            out.cores[k] = DenseTensor::from_right_unfold(q.transpose(), r1, n, r2)?;
            let p = &out.cores[k - 1];
            let pd = p.dims().to_vec();
            let merged = p.left_unfold()?.matmul(&r.transpose())?;
            out.cores[k - 1] = DenseTensor::from_left_unfold(merged, pd[0], pd[1], pd[2])?;
        }
        Ok(out)
    }

    /// QR of core `k`'s left unfolding: `Q` stays at `k`, `R` moves into `k + 1`.
    pub fn shift_core_qr(&self, k: usize) -> Result<Self> {
        let mut out = self.clone();
        out.shift_core_qr_in_place(k)?;
        Ok(out)
    }

    pub(crate) fn shift_core_qr_in_place(&mut self, k: usize) -> Result<()> {
        ensure!(
            k + 1 < self.cores.len(),
            InvalidArgument,
            "QR shift needs a successor core, got k={k} for order {}",
            self.cores.len()
        );
        let d = self.cores[k].dims().to_vec();
        let (r1, n, r2) = (d[0], d[1], d[2]);
        ensure!(
            r2 <= r1 * n,
            InvalidArgument,
            "core {k} with shape {d:?} cannot be left-orthogonalized"
        );
        let (q, r) = qr(&self.cores[k].left_unfold()?)?;
        self.cores[k] = DenseTensor::from_left_unfold(q, r1, n, r2)?;
        let nd = self.cores[k + 1].dims().to_vec();
        let merged = r.matmul(&self.cores[k + 1].right_unfold()?)?;
        self.cores[k + 1] = DenseTensor::from_right_unfold(merged, nd[0], nd[1], nd[2])?;
        Ok(())
    }
}
