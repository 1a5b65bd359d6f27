//! Sketch-size planning and a Monte-Carlo check of the approximate matrix
//! product property of TensorSketch.
//!
//! The planner's sizes are worst-case and far larger than what works in
//! practice; it is not used to pick a default `m`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ensure, Result};
use crate::rng::{standard_normal, substream, Stream};
use crate::sketch::TensorSketch;
use crate::tensor::{sum_squares, Matrix};

/// Which term of the bound is the larger one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Binding {
    /// `8 s² (2 + 3^q) / δ`
    Rank,
    /// `8 s (2 + 3^q) / (ε δ)`
    Accuracy,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SketchPlan {
    /// Subproblem width `r_{k-1} r_k`.
    pub s: u64,
    /// Number of sketched modes.
    pub q: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub m: u64,
    pub binding: Binding,
}

impl SketchPlan {
    pub fn new(s: u64, q: u32, epsilon: f64, delta: f64) -> Result<Self> {
        ensure!(s >= 1 && q >= 1, InvalidArgument, "s and q must be >= 1, got s={s}, q={q}");
        ensure!(
            epsilon > 0.0 && epsilon <= 1.0,
            InvalidArgument,
            "epsilon must lie in (0, 1], got {epsilon}"
        );
        ensure!(delta > 0.0 && delta < 1.0, InvalidArgument, "delta must lie in (0, 1), got {delta}");
        let (rank, accuracy) = bound_terms(s, q, epsilon, delta)?;
        let binding = match rank.cmp(&accuracy) {
            std::cmp::Ordering::Greater => Binding::Rank,
            std::cmp::Ordering::Less => Binding::Accuracy,
            std::cmp::Ordering::Equal => Binding::Both,
        };
        let top = rank.max(accuracy).ceil().to_integer();
        let m = top.to_u64().ok_or_else(|| {
            crate::Error::InvalidArgument(format!("sketch size bound {top} does not fit in u64"))
        })?;
        Ok(Self { s, q, epsilon, delta, m, binding })
    }
}

/// `max{8s²(2+3^q)/δ, 8s(2+3^q)/(εδ)}` rounded up, computed exactly.
pub fn sketch_size_bound(s: u64, q: u32, epsilon: f64, delta: f64) -> Result<u64> {
    SketchPlan::new(s, q, epsilon, delta).map(|p| p.m)
}

/// The two terms of the bound as exact rationals. Only positivity is checked,
/// so this also evaluates the formula outside the planner's domain.
pub fn bound_terms(s: u64, q: u32, epsilon: f64, delta: f64) -> Result<(BigRational, BigRational)> {
    let eps = decimal(epsilon)?;
    let del = decimal(delta)?;
    ensure!(
        eps > BigRational::zero() && del > BigRational::zero(),
        InvalidArgument,
        "epsilon and delta must be positive"
    );
    let s = BigRational::from_integer(BigInt::from(s));
    let c = BigRational::from_integer(BigInt::from(2) + num_traits::pow(BigInt::from(3), q as usize));
    let eight = BigRational::from_integer(BigInt::from(8));
    let rank = &eight * &s * &s * &c / &del;
    let accuracy = &eight * &s * &c / (&eps * &del);
    Ok((rank, accuracy))
}

/// Exact rational value of the shortest decimal that prints as `x`, so `0.1`
/// means `1/10` rather than the nearest binary fraction.
fn decimal(x: f64) -> Result<BigRational> {
    ensure!(x.is_finite(), InvalidArgument, "non-finite value {x}");
    let text = format!("{x}");
    let (neg, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    let numer: BigInt = format!("{int}{frac}").parse().expect("Display output is decimal");
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(numer, denom);
    Ok(if neg { -v } else { v })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmmReport {
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    /// `sqrt(p (1 - p) / trials)` at the observed rate.
    pub std_error: f64,
    /// Three standard errors.
    pub half_width: f64,
    /// Target failure probability.
    pub delta0: f64,
    /// `sqrt(δ₀ (1 − δ₀) / trials)`, the standard error under the target.
    pub std_error_at_delta0: f64,
}

impl AmmReport {
    /// Observed rate within three standard errors (at `δ₀`) of the target.
    pub fn consistent(&self) -> bool {
        self.failure_rate <= self.delta0 + 3.0 * self.std_error_at_delta0
    }
}

/// Number of random columns in `A` and `B`.
pub const AMM_COLUMNS: usize = 3;

/// Fraction of fresh TensorSketches over `dims` with
/// `‖AᵀSᵀSB − AᵀB‖² > ε₀² ‖A‖² ‖B‖²`, for fixed Gaussian `A`, `B`.
pub fn amm_validate(
    dims: &[usize],
    m: usize,
    epsilon0: f64,
    delta0: f64,
    trials: usize,
    seed: u64,
) -> Result<AmmReport> {
    let rows: usize = dims.iter().product();
    let mut rng = substream(seed, Stream::Data);
    let a = Matrix::from_fn(rows, AMM_COLUMNS, |_, _| standard_normal(&mut rng));
    let b = Matrix::from_fn(rows, AMM_COLUMNS, |_, _| standard_normal(&mut rng));
    amm_validate_with(&a, &b, dims, m, epsilon0, delta0, trials, seed)
}

#[allow(clippy::too_many_arguments)]
pub fn amm_validate_with(
    a: &Matrix<f64>,
    b: &Matrix<f64>,
    dims: &[usize],
    m: usize,
    epsilon0: f64,
    delta0: f64,
    trials: usize,
    seed: u64,
) -> Result<AmmReport> {
    ensure!(trials >= 100, InvalidArgument, "need at least 100 trials, got {trials}");
    ensure!(m >= 1, InvalidArgument, "sketch size must be >= 1");
    ensure!(epsilon0 > 0.0, InvalidArgument, "epsilon0 must be positive");
    ensure!(
        delta0 > 0.0 && delta0 < 1.0,
        InvalidArgument,
        "delta0 must lie in (0, 1), got {delta0}"
    );
    let rows: usize = dims.iter().product();
    ensure!(
        a.rows() == rows && b.rows() == rows,
        DimensionMismatch,
        "A and B need {rows} rows, got {} and {}",
        a.rows(),
        b.rows()
    );
    let exact = a.t_matmul(b)?;
    let limit = epsilon0 * epsilon0 * sum_squares(a.data()) * sum_squares(b.data());
    let mut failures = 0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let ts = TensorSketch::random(dims, m, &mut rng)?;
        let approx = ts.apply_rows(a)?.t_matmul(&ts.apply_rows(b)?)?;
        let err = sum_squares(approx.sub(&exact)?.data());
        if err > limit {
            failures += 1;
        }
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    let std_error = (p * (1.0 - p) / n).sqrt();
    Ok(AmmReport {
        trials,
        failures,
        failure_rate: p,
        std_error,
        half_width: 3.0 * std_error,
        delta0,
        std_error_at_delta0: (delta0 * (1.0 - delta0) / n).sqrt(),
    })
}

/// Independent generator for trial `t`, derived from the master seed by counter.
pub fn trial_rng(seed: u64, t: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&t.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(Stream::Trials as u64);
    rng
}

/// Smallest `m` with `m >= (2 + 3^q) / (ε₀² δ₀)`.
pub fn amm_min_sketch(q: u32, epsilon0: f64, delta0: f64) -> Result<u64> {
    let eps = decimal(epsilon0)?;
    let del = decimal(delta0)?;
    ensure!(
        eps > BigRational::zero() && del > BigRational::zero(),
        InvalidArgument,
        "epsilon0 and delta0 must be positive"
    );
    let c = BigRational::from_integer(BigInt::from(2) + num_traits::pow(BigInt::from(3), q as usize));
    let v = (c / (&eps * &eps * del)).ceil().to_integer();
    v.to_u64()
        .ok_or_else(|| crate::Error::InvalidArgument(format!("sketch size {v} does not fit in u64")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planner_examples() {
        assert_eq!(sketch_size_bound(1, 1, 1.0, 0.99).unwrap(), 41);
        let (r, a) = bound_terms(1, 1, 1.0, 1.0).unwrap();
        assert_eq!(r.max(a), BigRational::from_integer(40.into()));

        let p = SketchPlan::new(2, 2, 0.5, 0.1).unwrap();
        assert_eq!((p.m, p.binding), (3520, Binding::Both));

        let p = SketchPlan::new(3, 3, 0.1, 0.1).unwrap();
        assert_eq!((p.m, p.binding), (69600, Binding::Accuracy));
        let (r, _) = bound_terms(3, 3, 0.1, 0.1).unwrap();
        assert_eq!(r, BigRational::from_integer(20880.into()));
        assert_eq!(SketchPlan::new(10, 1, 1.0, 0.5).unwrap().binding, Binding::Rank);
    }

    #[test]
    fn planner_domain() {
        for (s, q, e, d) in [(0, 1, 0.5, 0.5), (1, 0, 0.5, 0.5), (1, 1, 0.0, 0.5), (1, 1, 1.5, 0.5), (1, 1, 0.5, 1.0), (1, 1, 0.5, 0.0)] {
            assert!(sketch_size_bound(s, q, e, d).unwrap_err().is_domain());
        }
        assert!(sketch_size_bound(1, 60, 0.01, 0.01).unwrap_err().is_domain());
    }

    #[test]
    fn planner_is_monotone() {
        let eps = [0.05, 0.1, 0.3, 0.7, 1.0];
        let dels = [0.01, 0.1, 0.5, 0.9];
        for s in 1..5u64 {
            for q in 1..5u32 {
                for (i, &e) in eps.iter().enumerate() {
                    for (j, &d) in dels.iter().enumerate() {
                        let m = sketch_size_bound(s, q, e, d).unwrap();
                        if i + 1 < eps.len() {
                            assert!(sketch_size_bound(s, q, eps[i + 1], d).unwrap() <= m);
                        }
                        if j + 1 < dels.len() {
                            assert!(sketch_size_bound(s, q, e, dels[j + 1]).unwrap() <= m);
                        }
                        assert!(sketch_size_bound(s + 1, q, e, d).unwrap() >= m);
                        assert!(sketch_size_bound(s, q + 1, e, d).unwrap() >= m);
                    }
                }
            }
        }
    }

    #[test]
    fn decimal_is_exact() {
        assert_eq!(decimal(0.1).unwrap(), BigRational::new(1.into(), 10.into()));
        assert_eq!(decimal(2.5).unwrap(), BigRational::new(5.into(), 2.into()));
        assert_eq!(decimal(-3.0).unwrap(), BigRational::from_integer((-3).into()));
        assert_eq!(decimal(1e-20).unwrap(), BigRational::new(1.into(), num_traits::pow(BigInt::from(10), 20)));
    }

    #[test]
    fn amm_minimum_sketch_size() {
        assert_eq!(amm_min_sketch(2, 0.5, 0.2).unwrap(), 220);
    }

    #[test]
    fn amm_basis_column_never_fails() {
        let dims = [4, 3];
        let e = Matrix::from_fn(12, 1, |i, _| if i == 5 { 1.0 } else { 0.0 });
        let rep = amm_validate_with(&e, &e, &dims, 3, 1e-9, 0.1, 100, 1).unwrap();
        assert_eq!(rep.failures, 0);
    }

    #[test]
    fn amm_requires_enough_trials() {
        assert!(amm_validate(&[4, 4], 10, 0.5, 0.2, 99, 0).unwrap_err().is_domain());
    }

    #[test]
    fn trial_rngs_differ_and_repeat() {
        use rand::Rng;
        let x: u64 = trial_rng(1, 0).random();
        let y: u64 = trial_rng(1, 1).random();
        let z: u64 = trial_rng(2, 0).random();
        assert_ne!(x, y);
        assert_ne!(x, z);
        assert_eq!(x, trial_rng(1, 0).random::<u64>());
    }
}
