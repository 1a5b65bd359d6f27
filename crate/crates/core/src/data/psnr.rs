use crate::error::{ensure, Result};
use crate::tensor::DenseTensor;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsnrOptions {
    pub peak: f64,
    /// Divide each slice's squared error by its element count (the usual MSE
    /// form). Off by default: the squared error is used as is.
    pub standard: bool,
}

impl Default for PsnrOptions {
    fn default() -> Self {
        Self { peak: 255.0, standard: false }
    }
}

/// Mean over last-mode slices of `10 log10(peak² / ‖slice difference‖²)`.
/// Returns `+∞` when any slice matches exactly.
pub fn psnr<T: Scalar>(a: &DenseTensor<T>, approx: &DenseTensor<T>) -> Result<f64> {
    psnr_with(a, approx, PsnrOptions::default())
}

pub fn psnr_with<T: Scalar>(a: &DenseTensor<T>, approx: &DenseTensor<T>, opts: PsnrOptions) -> Result<f64> {
    ensure!(
        a.dims() == approx.dims(),
        DimensionMismatch,
        "shapes {:?} and {:?} differ",
        a.dims(),
        approx.dims()
    );
    ensure!(a.order() >= 3, InvalidArgument, "PSNR needs an order >= 3 tensor, got {:?}", a.dims());
    let slices = *a.dims().last().expect("order >= 3");
    let size = a.len() / slices;
    let peak2 = opts.peak * opts.peak;
    let mut total = 0.0;
    for s in 0..slices {
        let range = s * size..(s + 1) * size;
        let mut err: f64 = a.data()[range.clone()]
            .iter()
            .zip(&approx.data()[range])
            .map(|(&x, &y)| (x - y).as_f64().powi(2))
            .sum();
        if opts.standard {
            err /= size as f64;
        }
        total += 10.0 * (peak2 / err).log10();
    }
    Ok(total / slices as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(dims: &[usize], data: Vec<f64>) -> DenseTensor<f64> {
        DenseTensor::new(dims.to_vec(), data).unwrap()
    }

    #[test]
    fn identical_is_infinite() {
        let a = t(&[2, 2, 2], (0..8).map(f64::from).collect());
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn single_peak_error_is_zero_db() {
        let a = t(&[2, 2, 1], vec![0.0; 4]);
        let b = t(&[2, 2, 1], vec![255.0, 0.0, 0.0, 0.0]);
        assert_eq!(psnr(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn uniform_difference_fixture() {
        let a = t(&[2, 2, 1], vec![0.0; 4]);
        let b = t(&[2, 2, 1], vec![255.0; 4]);
        let v = psnr(&a, &b).unwrap();
        assert!((v - (-6.0206)).abs() < 1e-4);
        assert!((v + 20.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn raw_and_standard_variants_differ_by_slice_size() {
        let a = t(&[3, 4, 5], (0..60).map(|i| (i * 7 % 13) as f64).collect());
        let b = t(&[3, 4, 5], (0..60).map(|i| (i * 5 % 11) as f64).collect());
        let raw = psnr(&a, &b).unwrap();
        let std = psnr_with(&a, &b, PsnrOptions { standard: true, ..Default::default() }).unwrap();
        assert!((raw - (std - 10.0 * 12f64.log10())).abs() < 1e-12);
    }

    #[test]
    fn order_four_slices_by_frame() {
        let a = t(&[2, 2, 3, 2], vec![0.0; 24]);
        let mut d = vec![0.0; 24];
        d[0] = 255.0;
        d[12] = 255.0;
        assert_eq!(psnr(&a, &t(&[2, 2, 3, 2], d)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        let a = t(&[2, 2, 1], vec![0.0; 4]);
        let b = t(&[4, 1, 1], vec![0.0; 4]);
        assert!(psnr(&a, &b).unwrap_err().is_domain());
        let m = t(&[2, 2], vec![0.0; 4]);
        assert!(psnr(&m, &m).unwrap_err().is_domain());
    }
}
