//! Experiment inputs, quality metrics and the DTF tensor file format.

mod dtf;
mod gen;
mod psnr;

pub use dtf::{load_dtf, read_dtf, save_dtf, write_dtf, DTF_MAGIC};
pub use gen::{function_values, gen_function_tensor, gen_synthetic, Function};
pub use psnr::{psnr, psnr_with, PsnrOptions};
