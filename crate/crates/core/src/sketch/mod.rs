//! CountSketch, TensorSketch and their fast application to TT cores.

mod countsketch;
mod dft;
mod fast;
mod hash;
mod tensorsketch;

pub use countsketch::CountSketch;
pub use dft::{dft, idft, Dft};
pub use fast::{sketch_core, sketch_kron_chain, sketch_mode_k_fibers, SketchedCore};
pub use hash::{PolyHash, MERSENNE_61};
pub use tensorsketch::TensorSketch;
