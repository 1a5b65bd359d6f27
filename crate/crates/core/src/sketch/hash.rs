//! Polynomial hashing modulo the Mersenne prime `2^61 - 1`.
//!
//! A uniformly random polynomial of degree `t` over `Z_p` is a `(t+1)`-wise
//! independent family on `[0, p)`. Degree 2 feeds bucket maps (3-wise) and
//! degree 3 feeds sign maps (4-wise).

use rand::Rng;

use crate::error::{ensure, Result};

pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[inline]
fn reduce(x: u128) -> u64 {
    // x < 2^122: fold twice
    let p = MERSENNE_61 as u128;
    let folded = (x & p) + (x >> 61);
    let folded = (folded & p) + (folded >> 61);
    let v = folded as u64;
    if v >= MERSENNE_61 {
        v - MERSENNE_61
    } else {
        v
    }
}

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    reduce(a as u128 * b as u128)
}

#[inline]
fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

/// `x -> c_0 + c_1 x + .. + c_t x^t mod (2^61 - 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyHash {
    coeffs: Vec<u64>,
}

impl PolyHash {
    pub fn random(degree: usize, rng: &mut impl Rng) -> Self {
        let coeffs = (0..=degree).map(|_| rng.random_range(0..MERSENNE_61)).collect();
        Self { coeffs }
    }

    /// Coefficients in increasing power order, each below the prime.
    pub fn from_coefficients(coeffs: Vec<u64>) -> Result<Self> {
        ensure!(!coeffs.is_empty(), InvalidArgument, "a polynomial needs a coefficient");
        ensure!(
            coeffs.iter().all(|&c| c < MERSENNE_61),
            InvalidArgument,
            "coefficients must lie in [0, 2^61 - 1)"
        );
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    /// Polynomial value in `[0, p)`. Keys must be below `p`.
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        debug_assert!(x < MERSENNE_61);
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| add_mod(mul_mod(acc, x), c))
    }

    /// Bucket in `[0, m)`.
    #[inline]
    pub fn bucket(&self, x: u64, m: usize) -> usize {
        (self.eval(x) % m as u64) as usize
    }

    /// Sign from the parity of the hash value.
    #[inline]
    pub fn sign(&self, x: u64) -> i8 {
        if self.eval(x) & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Stream};

    #[test]
    fn eval_matches_bigint_horner() {
        let mut rng = substream(1, Stream::Sketch);
        let h = PolyHash::random(3, &mut rng);
        let p = MERSENNE_61 as u128;
        for x in [0u64, 1, 2, 12345, MERSENNE_61 - 1] {
            let mut acc: u128 = 0;
            for &c in h.coefficients().iter().rev() {
                acc = (acc * x as u128 + c as u128) % p;
            }
            assert_eq!(h.eval(x) as u128, acc);
        }
    }

    #[test]
    fn constant_polynomial() {
        let h = PolyHash::from_coefficients(vec![7]).unwrap();
        assert_eq!(h.degree(), 0);
        assert_eq!(h.eval(99), 7);
        assert_eq!(h.bucket(99, 4), 3);
        assert_eq!(h.sign(3), -1);
        assert!(PolyHash::from_coefficients(vec![MERSENNE_61]).is_err());
    }

    #[test]
    fn buckets_roughly_uniform() {
        let mut rng = substream(2, Stream::Sketch);
        let m = 8;
        let trials = 4000;
        let mut counts = vec![0usize; m];
        for _ in 0..trials {
            let h = PolyHash::random(2, &mut rng);
            counts[h.bucket(5, m)] += 1;
        }
        let expect = trials as f64 / m as f64;
        let sd = (trials as f64 * (1.0 / m as f64) * (1.0 - 1.0 / m as f64)).sqrt();
        for c in counts {
            assert!((c as f64 - expect).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn pairwise_sign_products_are_unbiased() {
        let mut rng = substream(3, Stream::Sketch);
        let trials = 4000;
        let mut s = 0i64;
        for _ in 0..trials {
            let h = PolyHash::random(3, &mut rng);
            s += (h.sign(1) * h.sign(2)) as i64;
        }
        assert!((s as f64).abs() < 5.0 * (trials as f64).sqrt());
    }
}
