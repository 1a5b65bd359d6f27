//! Proximal alternating least squares over TT cores.
//!
//! All three algorithms run the same sweep: right-to-left orthogonalize, then
//! update cores left to right, moving the orthogonality center with a QR shift
//! after each interior core. They differ only in how the core subproblem is
//! assembled.

mod prox;
pub mod update;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::rng::{substream, Stream};
use crate::sketch::{CountSketch, Dft};
use crate::tensor::{sum_squares, DenseTensor};
use crate::tt::{check_rank_chain, uniform_ranks, TtTensor, DEFAULT_ENTRY_CAP};
use crate::Scalar;

pub use prox::prox_ls_solve;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Als,
    Ts,
    Random,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Als => "ALS",
            Algorithm::Ts => "TS",
            Algorithm::Random => "RANDOM",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "als" => Ok(Algorithm::Als),
            "ts" => Ok(Algorithm::Ts),
            "random" => Ok(Algorithm::Random),
            _ => Err(crate::Error::InvalidArgument(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Zero,
    #[default]
    Gaussian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    /// Full rank chain `r_0 = 1, .., r_d = 1`.
    pub ranks: Vec<usize>,
    pub sigma: T,
    /// Sketch size (TS) or sampled row count (RANDOM). Unused by ALS.
    pub sketch_size: usize,
    pub max_sweeps: usize,
    /// Stop once [`relative_change`] between sweeps falls below this.
    pub tol: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub init: Init,
    /// Record reconstruction error and objective after each sweep. Costs one
    /// dense reconstruction per sweep; skipped if that exceeds `entry_cap`.
    pub track_error: bool,
    pub entry_cap: usize,
    /// Value used for a core whose new norm is zero.
    pub change_cap: f64,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(algorithm: Algorithm, ranks: Vec<usize>) -> Self {
        Self {
            ranks,
            sigma: T::zero(),
            sketch_size: 0,
            max_sweeps: 200,
            tol: 1e-6,
            seed: 0,
            algorithm,
            init: Init::Gaussian,
            track_error: true,
            entry_cap: DEFAULT_ENTRY_CAP,
            change_cap: f64::INFINITY,
        }
    }

    /// Uniform interior rank `r` for an order-`d` tensor.
    pub fn uniform(algorithm: Algorithm, d: usize, r: usize) -> Self {
        Self::new(algorithm, uniform_ranks(d, r))
    }

    pub fn with_sigma(mut self, sigma: T) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_sketch_size(mut self, m: usize) -> Self {
        self.sketch_size = m;
        self
    }

    pub fn with_max_sweeps(mut self, n: usize) -> Self {
        self.max_sweeps = n;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_track_error(mut self, on: bool) -> Self {
        self.track_error = on;
        self
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        check_rank_chain(dims, &self.ranks, true)?;
        ensure!(
            self.sigma >= T::zero() && self.sigma.is_finite(),
            InvalidArgument,
            "sigma must be finite and >= 0, got {}",
            self.sigma
        );
        ensure!(self.tol > 0.0, InvalidArgument, "tol must be > 0, got {}", self.tol);
        ensure!(self.max_sweeps >= 1, InvalidArgument, "max_sweeps must be >= 1");
        if self.algorithm != Algorithm::Als {
            ensure!(
                self.sketch_size >= 1,
                InvalidArgument,
                "{} needs sketch_size >= 1",
                self.algorithm
            );
        }
        if self.algorithm == Algorithm::Ts {
            ensure!(dims.len() >= 2, InvalidArgument, "TS needs an order >= 2 tensor");
            let widest = self.ranks.windows(2).map(|w| w[0] * w[1]).max().unwrap_or(1);
            if self.sketch_size < widest {
                log::warn!(
                    "sketch size {} is below the widest subproblem ({widest} unknowns per column)",
                    self.sketch_size
                );
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepStats {
    /// One-based sweep counter.
    pub sweep: usize,
    pub rel_change: f64,
    pub recon_rel_err: Option<f64>,
    /// `½‖A − X‖²`.
    pub objective: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepReport {
    pub sweeps: Vec<SweepStats>,
    pub converged: bool,
    pub total_ms: f64,
}

impl SweepReport {
    pub fn last(&self) -> Option<&SweepStats> {
        self.sweeps.last()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.last().and_then(|s| s.recon_rel_err)
    }

    pub fn mean_sweep_ms(&self) -> f64 {
        if self.sweeps.is_empty() {
            return 0.0;
        }
        self.sweeps.iter().map(|s| s.wall_ms).sum::<f64>() / self.sweeps.len() as f64
    }
}

/// `max_k ‖G_k' − G_k‖ / ‖G_k'‖` over cores. A zero new core gives `cap`
/// (0 if the old one is also zero).
pub fn relative_change<T: Scalar>(prev: &TtTensor<T>, next: &TtTensor<T>, cap: f64) -> Result<f64> {
    ensure!(
        prev.order() == next.order(),
        DimensionMismatch,
        "orders {} and {} differ",
        prev.order(),
        next.order()
    );
    let mut worst = 0.0f64;
    for (k, (a, b)) in prev.cores().iter().zip(next.cores()).enumerate() {
        ensure!(
            a.dims() == b.dims(),
            DimensionMismatch,
            "core {k} shapes {:?} and {:?} differ",
            a.dims(),
            b.dims()
        );
        let diff: f64 = a
            .data()
            .iter()
            .zip(b.data())
            .map(|(&x, &y)| (x - y).as_f64().powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = sum_squares(b.data()).as_f64().sqrt();
        let ratio = if norm > 0.0 {
            diff / norm
        } else if diff > 0.0 {
            cap
        } else {
            0.0
        };
        worst = worst.max(ratio);
    }
    Ok(worst)
}

/// Observer hook: `(tt, sweep, k)` after core `k` of a sweep is replaced and
/// before the orthogonality center moves on.
pub type Observer<'a, T> = dyn FnMut(&TtTensor<T>, usize, usize) + 'a;

pub fn decompose<T: Scalar>(
    a: &DenseTensor<T>,
    cfg: &SolverConfig<T>,
) -> Result<(TtTensor<T>, SweepReport)> {
    decompose_observed(a, cfg, &mut |_, _, _| {})
}

pub fn tt_als<T: Scalar>(a: &DenseTensor<T>, cfg: &SolverConfig<T>) -> Result<(TtTensor<T>, SweepReport)> {
    expect_algorithm(cfg, Algorithm::Als)?;
    decompose(a, cfg)
}

pub fn tt_ts<T: Scalar>(a: &DenseTensor<T>, cfg: &SolverConfig<T>) -> Result<(TtTensor<T>, SweepReport)> {
    expect_algorithm(cfg, Algorithm::Ts)?;
    decompose(a, cfg)
}

pub fn tt_random<T: Scalar>(
    a: &DenseTensor<T>,
    cfg: &SolverConfig<T>,
) -> Result<(TtTensor<T>, SweepReport)> {
    expect_algorithm(cfg, Algorithm::Random)?;
    decompose(a, cfg)
}

fn expect_algorithm<T>(cfg: &SolverConfig<T>, want: Algorithm) -> Result<()> {
    ensure!(
        cfg.algorithm == want,
        InvalidArgument,
        "config selects {}, expected {want}",
        cfg.algorithm
    );
    Ok(())
}

/// Starting point for a run, before the first orthogonalization.
pub fn initial_tt<T: Scalar>(dims: &[usize], cfg: &SolverConfig<T>) -> Result<TtTensor<T>> {
    match cfg.init {
        Init::Gaussian => TtTensor::random(dims, &cfg.ranks, cfg.seed),
        Init::Zero => TtTensor::zeros(dims, &cfg.ranks),
    }
}

pub fn decompose_observed<T: Scalar>(
    a: &DenseTensor<T>,
    cfg: &SolverConfig<T>,
    observer: &mut Observer<'_, T>,
) -> Result<(TtTensor<T>, SweepReport)> {
    let dims = a.dims().to_vec();
    cfg.validate(&dims)?;
    let d = dims.len();
    let a_norm_sq = sum_squares(a.data()).as_f64();

    let mut sketch_rng = substream(cfg.seed, Stream::Sketch);
    let mut sample_rng = substream(cfg.seed, Stream::Sampling);
    let dft = match cfg.algorithm {
        Algorithm::Ts => Some(Dft::<T>::new(cfg.sketch_size)),
        _ => None,
    };

    let mut prev = initial_tt(&dims, cfg)?;
    let mut report = SweepReport::default();
    let start = Instant::now();

    for sweep in 1..=cfg.max_sweeps {
        let t0 = Instant::now();
        let mut tt = prev.right_orthogonalize()?;
        let sketches: Vec<CountSketch> = if cfg.algorithm == Algorithm::Ts {
            dims.iter()
                .map(|&n| CountSketch::random(n, cfg.sketch_size, &mut sketch_rng))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        for k in 0..d {
            let core = match cfg.algorithm {
                Algorithm::Als => update::als_update(a, &tt, k, cfg.sigma, cfg.entry_cap)?,
                Algorithm::Ts => {
                    let dft = dft.as_ref().expect("DFT plan exists for TS");
                    update::sketched_update(a, &tt, k, &sketches, cfg.sigma, dft)?
                }
                Algorithm::Random => {
                    let total = a.len() / dims[k];
                    let rows = update::sample_rows(total, cfg.sketch_size, &mut sample_rng);
                    update::sampled_update(a, &tt, k, &rows, cfg.sigma)?
                }
            };
            tt.set_core(k, core)?;
            observer(&tt, sweep, k);
            if k + 1 < d {
                tt.shift_core_qr_in_place(k)?;
            }
        }
        let wall_ms = t0.elapsed().as_secs_f64() * 1e3;

        let rel_change = relative_change(&prev, &tt, cfg.change_cap)?;
        let (recon_rel_err, objective) = if cfg.track_error {
            residual(a, &tt, a_norm_sq, cfg.entry_cap)
        } else {
            (None, None)
        };
        log::debug!(
            "{} sweep {sweep}: change {rel_change:.3e}, error {recon_rel_err:?}, {wall_ms:.1} ms",
            cfg.algorithm
        );
        report.sweeps.push(SweepStats { sweep, rel_change, recon_rel_err, objective, wall_ms });
        prev = tt;
        if rel_change < cfg.tol {
            report.converged = true;
            break;
        }
    }
    report.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((prev, report))
}

/// `(‖A − X‖ / ‖A‖, ½‖A − X‖²)`, or `None` if `X` is too large to form.
fn residual<T: Scalar>(
    a: &DenseTensor<T>,
    tt: &TtTensor<T>,
    a_norm_sq: f64,
    cap: usize,
) -> (Option<f64>, Option<f64>) {
    let Ok(full) = tt.full_with_cap(cap) else {
        return (None, None);
    };
    let r2: f64 = a
        .data()
        .iter()
        .zip(full.data())
        .map(|(&x, &y)| (x - y).as_f64().powi(2))
        .sum();
    let rel = if a_norm_sq > 0.0 { (r2 / a_norm_sq).sqrt() } else { r2.sqrt() };
    (Some(rel), Some(0.5 * r2))
}

/// `½‖A − X‖²` with a dense reconstruction of `X`.
pub fn objective<T: Scalar>(a: &DenseTensor<T>, tt: &TtTensor<T>) -> Result<f64> {
    let full = tt.full()?;
    ensure!(
        full.dims() == a.dims(),
        DimensionMismatch,
        "tensor {:?} and TT {:?} disagree",
        a.dims(),
        full.dims()
    );
    Ok(0.5
        * a.data()
            .iter()
            .zip(full.data())
            .map(|(&x, &y)| (x - y).as_f64().powi(2))
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Matrix;

    fn rank1_matrix() -> DenseTensor<f64> {
        let u = [1.0, -2.0, 0.5, 3.0];
        let v = [2.0, 1.0, -1.0];
        DenseTensor::from_fn(vec![4, 3], |i| u[i[0]] * v[i[1]]).unwrap()
    }

    fn synthetic(dims: &[usize], r: usize, seed: u64) -> DenseTensor<f64> {
        let mut ranks = vec![r; dims.len() + 1];
        ranks[0] = 1;
        ranks[dims.len()] = 1;
        TtTensor::<f64>::random(dims, &ranks, seed + 1000).unwrap().full().unwrap()
    }

    #[test]
    fn als_rank1_matrix_within_five_sweeps() {
        let a = rank1_matrix();
        let cfg = SolverConfig::<f64>::uniform(Algorithm::Als, 2, 1).with_max_sweeps(5).with_seed(3);
        let (tt, rep) = tt_als(&a, &cfg).unwrap();
        assert!(rep.final_error().unwrap() <= 1e-10);
        let full = tt.full().unwrap();
        let err = full.data().iter().zip(a.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn als_exact_rank_recovers_with_descent() {
        let a = synthetic(&[4, 5, 3], 2, 1);
        let cfg = SolverConfig::<f64>::uniform(Algorithm::Als, 3, 2).with_seed(2).with_tol(1e-12);
        let mut objs = Vec::new();
        let (_, rep) = decompose_observed(&a, &cfg, &mut |tt, _, _| {
            objs.push(objective(&a, tt).unwrap());
        })
        .unwrap();
        let scale = sum_squares(a.data());
        for w in objs.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * scale);
        }
        assert!(*objs.last().unwrap() <= 1e-16 * scale);
        assert!(rep.sweeps.windows(2).all(|w| w[0].sweep < w[1].sweep));
    }

    #[test]
    fn prox_descent_per_update() {
        let mut a = synthetic(&[3, 4, 3], 2, 5);
        for (i, v) in a.data_mut().iter_mut().enumerate() {
            *v += 0.3 * ((i * 7) as f64).cos();
        }
        let cfg = SolverConfig::<f64>::uniform(Algorithm::Als, 3, 2)
            .with_sigma(0.5)
            .with_max_sweeps(10)
            .with_seed(9);
        let mut objs = vec![objective(&a, &initial_tt(a.dims(), &cfg).unwrap()).unwrap()];
        decompose_observed(&a, &cfg, &mut |tt, _, _| objs.push(objective(&a, tt).unwrap())).unwrap();
        let scale = sum_squares(a.data());
        for w in objs.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * scale, "{} > {}", w[1], w[0]);
        }
    }

    #[test]
    fn sweep_gauge_left_orthogonal_after_shift() {
        let a = synthetic(&[3, 4, 3], 2, 2);
        let cfg = SolverConfig::<f64>::uniform(Algorithm::Ts, 3, 2)
            .with_sigma(0.1)
            .with_sketch_size(16)
            .with_max_sweeps(2);
        let mut checked = 0;
        decompose_observed(&a, &cfg, &mut |tt, _, k| {
            // Cores before k were left-orthogonalized by the previous shifts.
            for j in 0..k {
                let l = tt.core(j).left_unfold().unwrap();
                let g = l.gram();
                assert!(g.sub(&Matrix::identity(g.rows())).unwrap().frobenius_norm() < 1e-12);
            }
            // Cores after k are still right-orthogonal from the sweep start.
            for j in k + 1..tt.order() {
                let r = tt.core(j).right_unfold().unwrap().transpose();
                let g = r.gram();
                assert!(g.sub(&Matrix::identity(g.rows())).unwrap().frobenius_norm() < 1e-12);
            }
            checked += 1;
        })
        .unwrap();
        assert_eq!(checked, 6);
    }

    #[test]
    fn zero_init_with_sigma_runs_for_all_algorithms() {
        let a = synthetic(&[3, 3, 3], 2, 4);
        for alg in [Algorithm::Als, Algorithm::Ts, Algorithm::Random] {
            let cfg = SolverConfig::<f64>::uniform(alg, 3, 2)
                .with_sigma(1.0)
                .with_sketch_size(8)
                .with_init(Init::Zero)
                .with_max_sweeps(5);
            let (tt, rep) = decompose(&a, &cfg).unwrap();
            assert_eq!(rep.sweeps.len(), 5);
            assert!(tt.cores().iter().all(|c| c.data().iter().all(|v| v.is_finite())));
        }
    }

    #[test]
    fn runs_are_seed_deterministic() {
        let a = synthetic(&[4, 3, 4], 2, 6);
        for alg in [Algorithm::Ts, Algorithm::Random] {
            let cfg = SolverConfig::<f64>::uniform(alg, 3, 2)
                .with_sigma(0.1)
                .with_sketch_size(10)
                .with_max_sweeps(4)
                .with_seed(11);
            let (t1, r1) = decompose(&a, &cfg).unwrap();
            let (t2, r2) = decompose(&a, &cfg).unwrap();
            assert_eq!(t1, t2);
            let errs = |r: &SweepReport| r.sweeps.iter().map(|s| s.recon_rel_err).collect::<Vec<_>>();
            assert_eq!(errs(&r1), errs(&r2));
            let (t3, _) = decompose(&a, &cfg.clone().with_seed(12)).unwrap();
            assert_ne!(t1, t3);
        }
    }

    #[test]
    fn ts_reaches_als_accuracy_on_small_instance() {
        let a = synthetic(&[5, 5, 5, 5], 2, 7);
        let base = SolverConfig::<f64>::uniform(Algorithm::Als, 4, 2).with_seed(1).with_max_sweeps(30);
        let (_, als) = tt_als(&a, &base).unwrap();
        let ts_cfg = SolverConfig { algorithm: Algorithm::Ts, ..base.clone() }
            .with_sigma(0.1)
            .with_sketch_size(100)
            .with_max_sweeps(100);
        let (_, ts) = tt_ts(&a, &ts_cfg).unwrap();
        assert!(als.final_error().unwrap() < 1e-8);
        assert!(ts.final_error().unwrap() < 1e-3, "{:?}", ts.final_error());
    }

    #[test]
    fn relative_change_examples() {
        let t = TtTensor::<f64>::random(&[2, 3, 2], &[1, 2, 2, 1], 1).unwrap();
        assert_eq!(relative_change(&t, &t, f64::INFINITY).unwrap(), 0.0);
        let mut doubled = t.clone();
        let c = doubled.core(1).clone();
        let twice = DenseTensor::new(c.dims().to_vec(), c.data().iter().map(|v| 2.0 * v).collect()).unwrap();
        doubled.set_core(1, twice).unwrap();
        assert!((relative_change(&t, &doubled, f64::INFINITY).unwrap() - 0.5).abs() < 1e-15);

        let u = TtTensor::<f64>::random(&[2, 3, 2], &[1, 2, 2, 1], 2).unwrap();
        let oracle = (0..3)
            .map(|k| {
                let (a, b) = (t.core(k).data(), u.core(k).data());
                let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
                let den: f64 = b.iter().map(|y| y * y).sum();
                (num / den).sqrt()
            })
            .fold(0.0, f64::max);
        assert!((relative_change(&t, &u, f64::INFINITY).unwrap() - oracle).abs() < 1e-14);

        let z = TtTensor::<f64>::zeros(&[2, 3, 2], &[1, 2, 2, 1]).unwrap();
        assert_eq!(relative_change(&t, &z, f64::INFINITY).unwrap(), f64::INFINITY);
        assert_eq!(relative_change(&t, &z, 10.0).unwrap(), 10.0);
        assert_eq!(relative_change(&z, &z, 10.0).unwrap(), 0.0);
        let other = TtTensor::<f64>::zeros(&[2, 2, 2], &[1, 2, 2, 1]).unwrap();
        assert!(relative_change(&t, &other, 1.0).unwrap_err().is_domain());
    }

    #[test]
    fn config_validation() {
        let dims = [3, 3, 3];
        let ok = SolverConfig::<f64>::uniform(Algorithm::Ts, 3, 2).with_sketch_size(4);
        ok.validate(&dims).unwrap();
        assert!(ok.clone().with_sigma(-1.0).validate(&dims).is_err());
        assert!(ok.clone().with_tol(0.0).validate(&dims).is_err());
        assert!(ok.clone().with_sketch_size(0).validate(&dims).is_err());
        assert!(ok.clone().with_max_sweeps(0).validate(&dims).is_err());
        assert!(SolverConfig::<f64>::uniform(Algorithm::Als, 3, 5).validate(&dims).is_err());
        let a = DenseTensor::<f64>::zeros(dims.to_vec()).unwrap();
        assert!(tt_als(&a, &ok).unwrap_err().is_domain());
        assert_eq!("ts".parse::<Algorithm>().unwrap(), Algorithm::Ts);
    }

    #[test]
    fn f32_solver_runs() {
        let a64 = synthetic(&[3, 4, 3], 2, 3);
        let a = DenseTensor::<f32>::new(a64.dims().to_vec(), a64.data().iter().map(|&v| v as f32).collect())
            .unwrap();
        let cfg = SolverConfig::<f32>::uniform(Algorithm::Als, 3, 2).with_max_sweeps(20);
        let (_, rep) = decompose(&a, &cfg).unwrap();
        assert!(rep.final_error().unwrap() < 1e-3);
    }
}
