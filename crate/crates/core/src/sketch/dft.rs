//! Discrete Fourier transform of arbitrary length, `w = exp(-2πi/m)`.
//!
//! The inverse is normalized so that `idft(dft(x)) = x`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::Scalar;

/// Forward and inverse plans for one transform length.
#[derive(Clone)]
pub struct Dft<T: Scalar> {
    len: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> std::fmt::Debug for Dft<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("len", &self.len).finish()
    }
}

impl<T: Scalar> Dft<T> {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place transform of consecutive length-`len` blocks.
    pub fn forward(&self, buf: &mut [Complex<T>]) {
        self.forward.process(buf);
    }

    /// In-place normalized inverse of consecutive length-`len` blocks.
    pub fn inverse(&self, buf: &mut [Complex<T>]) {
        self.inverse.process(buf);
        let scale = T::one() / T::of_usize(self.len);
        for v in buf.iter_mut() {
            *v = v.scale(scale);
        }
    }
}

pub fn dft<T: Scalar>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut buf = x.to_vec();
    if !buf.is_empty() {
        Dft::new(buf.len()).forward(&mut buf);
    }
    buf
}

pub fn idft<T: Scalar>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut buf = x.to_vec();
    if !buf.is_empty() {
        Dft::new(buf.len()).inverse(&mut buf);
    }
    buf
}
