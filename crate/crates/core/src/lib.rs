//! Tensor-train decomposition by alternating least squares with a proximal
//! term, accelerated by TensorSketch.
//!
//! Three solvers share one sweep skeleton ([`solver`]):
//!
//! - `ALS`: exact proximal least squares on the full design matrix.
//! - `TS`: each subproblem is compressed with a TensorSketch whose product with
//!   the Kronecker-structured design matrix is formed core by core in the
//!   Fourier domain ([`sketch`]).
//! - `RANDOM`: each subproblem keeps a uniform sample of design rows.
//!
//! Everything numeric is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix it to `f64`, which is what the solvers are tuned for.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod linalg;
pub mod rng;
mod scalar;
pub mod sketch;
pub mod solver;
pub mod tensor;
pub mod theory;
pub mod tt;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use sketch::{CountSketch, PolyHash, TensorSketch};
pub use solver::{Algorithm, Init, SolverConfig, SweepReport};
pub use tensor::{DenseTensor, Matrix};
pub use theory::SketchPlan;
pub use tt::TtTensor;

pub type Tensor = DenseTensor<f64>;
pub type Tensor32 = DenseTensor<f32>;
pub type Mat = Matrix<f64>;
pub type Mat32 = Matrix<f32>;
pub type Tt = TtTensor<f64>;
pub type Tt32 = TtTensor<f32>;
pub type Config = SolverConfig<f64>;
