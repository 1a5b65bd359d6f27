use std::f64::consts::PI;

use crate::error::{ensure, Result};
use crate::rng::{standard_normal, substream, Stream};
use crate::tensor::DenseTensor;
use crate::tt::TtTensor;
use crate::Scalar;

/// Random TT ground truth plus i.i.d. `N(0, noise_std²)` noise.
///
/// The truth has standard normal cores drawn from `seed`; the noise comes from
/// a separate stream of the same seed.
pub fn gen_synthetic<T: Scalar>(
    dims: &[usize],
    ranks: &[usize],
    noise_std: f64,
    seed: u64,
) -> Result<(DenseTensor<T>, TtTensor<T>)> {
    ensure!(
        noise_std >= 0.0 && noise_std.is_finite(),
        InvalidArgument,
        "noise_std must be finite and >= 0, got {noise_std}"
    );
    let truth = TtTensor::random(dims, ranks, seed)?;
    let mut a = truth.full()?;
    if noise_std > 0.0 {
        let mut rng = substream(seed, Stream::Noise);
        for v in a.data_mut() {
            *v += T::of(noise_std * standard_normal(&mut rng));
        }
    }
    Ok((a, truth))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Function {
    /// `sin(πx)/(πx)` on `N` equispaced points of `[-5, 5]`, both ends included.
    Sinc,
    /// `sin(4/x) cos(x²)` at `x_i = i/N`, `i = 1..N`.
    Osc,
}

impl std::str::FromStr for Function {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sinc" => Ok(Function::Sinc),
            "osc" => Ok(Function::Osc),
            _ => Err(crate::Error::InvalidArgument(format!("unknown function {s:?}"))),
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// The `count` sampled values, in grid order.
pub fn function_values(f: Function, count: usize) -> Result<Vec<f64>> {
    ensure!(count >= 1, InvalidArgument, "need at least one sample");
    Ok(match f {
        Function::Sinc => (0..count)
            .map(|i| {
                let x = if count == 1 {
                    -5.0
                } else {
                    -5.0 + 10.0 * i as f64 / (count - 1) as f64
                };
                sinc(x)
            })
            .collect(),
        Function::Osc => (1..=count)
            .map(|i| {
                let x = i as f64 / count as f64;
                (4.0 / x).sin() * (x * x).cos()
            })
            .collect(),
    })
}

/// Samples `f` at `count` points and reshapes them column-major into `dims`.
pub fn gen_function_tensor<T: Scalar>(f: Function, count: usize, dims: &[usize]) -> Result<DenseTensor<T>> {
    let total = dims.iter().try_fold(1usize, |a, &n| a.checked_mul(n));
    ensure!(
        total == Some(count),
        InvalidArgument,
        "dims {dims:?} do not hold exactly {count} values"
    );
    let data = function_values(f, count)?.into_iter().map(T::of).collect();
    DenseTensor::new(dims.to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tt::uniform_ranks;

    #[test]
    fn synthetic_noiseless_is_exact_and_seeded() {
        let ranks = uniform_ranks(3, 2);
        let (a, t) = gen_synthetic::<f64>(&[3, 4, 2], &ranks, 0.0, 5).unwrap();
        assert_eq!(a, t.full().unwrap());
        let (b, u) = gen_synthetic::<f64>(&[3, 4, 2], &ranks, 0.0, 5).unwrap();
        assert_eq!((a, t), (b, u));
    }

    #[test]
    fn synthetic_noise_has_requested_scale() {
        let ranks = uniform_ranks(3, 2);
        let (a, t) = gen_synthetic::<f64>(&[20, 20, 20], &ranks, 0.1, 2).unwrap();
        let full = t.full().unwrap();
        let n = a.len() as f64;
        let var: f64 = a.data().iter().zip(full.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n;
        assert!((var.sqrt() - 0.1).abs() < 0.005, "{}", var.sqrt());
        assert!(gen_synthetic::<f64>(&[2, 2], &[1, 1, 1], -1.0, 0).is_err());
    }

    #[test]
    fn sinc_three_points() {
        let v = function_values(Function::Sinc, 3).unwrap();
        assert!(v[0].abs() < 1e-15 && v[2].abs() < 1e-15);
        assert_eq!(v[1], 1.0);
    }

    #[test]
    fn osc_grid_excludes_zero() {
        let v = function_values(Function::Osc, 4).unwrap();
        for (i, x) in [0.25f64, 0.5, 0.75, 1.0].iter().enumerate() {
            assert_eq!(v[i], (4.0 / x).sin() * (x * x).cos());
        }
    }

    #[test]
    fn reshape_keeps_flat_data() {
        let a = gen_function_tensor::<f64>(Function::Sinc, 1000, &[10, 10, 10]).unwrap();
        let b = gen_function_tensor::<f64>(Function::Sinc, 1000, &[1000]).unwrap();
        assert_eq!(a.data(), b.data());
        assert_eq!(a.get(&[9, 9, 9]).unwrap(), sinc(5.0));
        assert!(gen_function_tensor::<f64>(Function::Osc, 1000, &[10, 10]).unwrap_err().is_domain());
    }

    #[test]
    fn million_point_sinc_is_order_six() {
        let a = gen_function_tensor::<f64>(Function::Sinc, 1_000_000, &[10; 6]).unwrap();
        assert_eq!(a.order(), 6);
        assert_eq!(a.data()[0], sinc(-5.0));
    }
}
