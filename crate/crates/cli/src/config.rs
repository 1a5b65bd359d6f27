//! Experiment config: a TOML file with a `[data]` table and one or more
//! `[[run]]` tables. List-valued `sigma`, `sketch_size` and `seed` expand into
//! their cartesian product.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ttsketch::data::Function;
use ttsketch::tt::uniform_ranks;
use ttsketch::{Algorithm, Config, Init};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub data: DataSpec,
    #[serde(rename = "run")]
    pub runs: Vec<RunSpec>,
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub kind: DataKind,
    #[serde(default)]
    pub dims: Vec<usize>,
    /// Uniform TT rank of the synthetic ground truth.
    pub rank: Option<usize>,
    #[serde(default)]
    pub noise_std: f64,
    /// Sample count for function tensors; defaults to the product of `dims`.
    pub count: Option<usize>,
    /// DTF file for `kind = "file"`, relative to the config file.
    pub path: Option<PathBuf>,
    /// Overrides the master seed for data generation.
    pub seed: Option<u64>,
    /// Report PSNR of each reconstruction.
    #[serde(default)]
    pub psnr: bool,
    #[serde(default = "default_peak")]
    pub peak: f64,
}

fn default_peak() -> f64 {
    255.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Synthetic,
    Sinc,
    Osc,
    File,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub name: Option<String>,
    pub algorithm: Algorithm,
    pub rank: Option<usize>,
    pub ranks: Option<Vec<usize>>,
    pub sigma: Option<OneOrMany<f64>>,
    pub sketch_size: Option<OneOrMany<usize>>,
    pub seed: Option<OneOrMany<u64>>,
    pub max_sweeps: Option<usize>,
    pub tol: Option<f64>,
    pub init: Option<Init>,
}

/// One fully specified solver run.
#[derive(Debug, Clone, Serialize)]
pub struct RunPlan {
    pub name: String,
    #[serde(skip)]
    pub config: Config,
    pub algorithm: Algorithm,
    pub ranks: Vec<usize>,
    pub sigma: f64,
    pub sketch_size: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    pub tol: f64,
    pub init: Init,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: impl std::fmt::Display, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {msg}"))
}

pub fn load(path: &Path) -> Result<ExperimentFile, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

pub fn parse(text: &str) -> Result<ExperimentFile, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_owned()))
}

impl DataSpec {
    /// Shape of the tensor this spec produces, when known without loading it.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.kind {
            DataKind::Synthetic => {
                if self.dims.is_empty() {
                    return Err(bad("data.dims", "required for synthetic data"));
                }
                if self.rank.is_none() {
                    return Err(bad("data.rank", "required for synthetic data"));
                }
                if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
                    return Err(bad("data.noise_std", "must be finite and >= 0"));
                }
            }
            DataKind::Sinc | DataKind::Osc => {
                if self.dims.is_empty() {
                    return Err(bad("data.dims", "required for function data"));
                }
                let total: Option<usize> = self.dims.iter().try_fold(1usize, |a, &n| a.checked_mul(n));
                if let Some(count) = self.count {
                    if total != Some(count) {
                        return Err(bad("data.count", format!("{count} does not match dims {:?}", self.dims)));
                    }
                }
            }
            DataKind::File => {
                if self.path.is_none() {
                    return Err(bad("data.path", "required for file data"));
                }
            }
        }
        if self.dims.contains(&0) {
            return Err(bad("data.dims", "entries must be positive"));
        }
        if self.psnr && !(self.peak > 0.0) {
            return Err(bad("data.peak", "must be positive"));
        }
        Ok(())
    }

    pub fn function(&self) -> Option<Function> {
        match self.kind {
            DataKind::Sinc => Some(Function::Sinc),
            DataKind::Osc => Some(Function::Osc),
            _ => None,
        }
    }
}

impl ExperimentFile {
    /// Expands every `[[run]]` into concrete plans and validates them against
    /// the tensor shape.
    pub fn plans(&self, dims: &[usize]) -> Result<Vec<RunPlan>, ConfigError> {
        if self.runs.is_empty() {
            return Err(bad("run", "at least one [[run]] table is required"));
        }
        let mut plans = Vec::new();
        for (i, run) in self.runs.iter().enumerate() {
            let field = |f: &str| format!("run[{i}].{f}");
            let ranks = match (&run.rank, &run.ranks) {
                (Some(_), Some(_)) => return Err(bad(field("ranks"), "give either rank or ranks, not both")),
                (Some(r), None) => uniform_ranks(dims.len(), *r),
                (None, Some(rs)) => rs.clone(),
                (None, None) => return Err(bad(field("rank"), "missing")),
            };
            let sigmas = run.sigma.as_ref().map_or(vec![0.0], OneOrMany::values);
            let sizes = run.sketch_size.as_ref().map_or(vec![0], OneOrMany::values);
            let seeds = run.seed.as_ref().map_or(vec![self.seed], OneOrMany::values);
            for (f, empty) in [("sigma", sigmas.is_empty()), ("sketch_size", sizes.is_empty()), ("seed", seeds.is_empty())] {
                if empty {
                    return Err(bad(field(f), "empty list"));
                }
            }
            if run.algorithm != Algorithm::Als && run.sketch_size.is_none() {
                return Err(bad(field("sketch_size"), format!("required for {}", run.algorithm)));
            }
            for &sigma in &sigmas {
                for &m in &sizes {
                    for &seed in &seeds {
                        let mut cfg = Config::new(run.algorithm, ranks.clone())
                            .with_sigma(sigma)
                            .with_sketch_size(m)
                            .with_seed(seed)
                            .with_init(run.init.unwrap_or_default());
                        if let Some(n) = run.max_sweeps {
                            cfg = cfg.with_max_sweeps(n);
                        }
                        if let Some(t) = run.tol {
                            cfg = cfg.with_tol(t);
                        }
                        if !(sigma >= 0.0 && sigma.is_finite()) {
                            return Err(bad(field("sigma"), format!("must be finite and >= 0, got {sigma}")));
                        }
                        if run.algorithm != Algorithm::Als && m == 0 {
                            return Err(bad(field("sketch_size"), format!("must be >= 1 for {}", run.algorithm)));
                        }
                        if !(cfg.tol > 0.0) {
                            return Err(bad(field("tol"), "must be > 0"));
                        }
                        if cfg.max_sweeps == 0 {
                            return Err(bad(field("max_sweeps"), "must be >= 1"));
                        }
                        cfg.validate(dims).map_err(|e| bad(field("ranks"), e))?;
                        let base = run.name.clone().unwrap_or_else(|| run.algorithm.name().to_lowercase());
                        let name = format!("{:02}_{base}_m{m}_sigma{sigma}_seed{seed}", plans.len());
                        plans.push(RunPlan {
                            name,
                            algorithm: run.algorithm,
                            ranks: cfg.ranks.clone(),
                            sigma,
                            sketch_size: m,
                            seed,
                            max_sweeps: cfg.max_sweeps,
                            tol: cfg.tol,
                            init: cfg.init,
                            config: cfg,
                        });
                    }
                }
            }
        }
        Ok(plans)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 3
[data]
kind = "synthetic"
dims = [4, 4, 4]
rank = 2
"#;

    #[test]
    fn expands_cartesian_product() {
        let text = format!("{BASE}\n[[run]]\nalgorithm = \"ts\"\nrank = 2\nsigma = [0.0, 0.5]\nsketch_size = [8, 16]\nseed = [1, 2, 3]\n");
        let cfg = parse(&text).unwrap();
        cfg.data.validate().unwrap();
        let plans = cfg.plans(&[4, 4, 4]).unwrap();
        assert_eq!(plans.len(), 12);
        assert_eq!(plans[0].name, "00_ts_m8_sigma0_seed1");
        assert_eq!(plans[11].sigma, 0.5);
    }

    #[test]
    fn ts_without_sketch_size_names_the_field() {
        let text = format!("{BASE}\n[[run]]\nalgorithm = \"ts\"\nrank = 2\nsketch_size = 0\n");
        let err = parse(&text).unwrap().plans(&[4, 4, 4]).unwrap_err();
        assert!(err.0.starts_with("run[0].sketch_size"), "{err}");
        let text = format!("{BASE}\n[[run]]\nalgorithm = \"random\"\nrank = 2\n");
        let err = parse(&text).unwrap().plans(&[4, 4, 4]).unwrap_err();
        assert!(err.0.starts_with("run[0].sketch_size"), "{err}");
    }

    #[test]
    fn unknown_field_reports_location() {
        let text = format!("{BASE}\n[[run]]\nalgorithm = \"als\"\nrank = 2\nsigmaa = 1.0\n");
        let err = parse(&text).unwrap_err();
        assert!(err.0.contains("sigmaa") && err.0.contains("line"), "{err}");
    }

    #[test]
    fn data_validation() {
        let mut cfg = parse(&format!("{BASE}\n[[run]]\nalgorithm = \"als\"\nrank = 2\n")).unwrap();
        cfg.data.rank = None;
        assert!(cfg.data.validate().unwrap_err().0.starts_with("data.rank"));
        cfg.data.kind = DataKind::Sinc;
        cfg.data.count = Some(10);
        assert!(cfg.data.validate().unwrap_err().0.starts_with("data.count"));
    }

    #[test]
    fn bad_ranks_are_config_errors() {
        let text = format!("{BASE}\n[[run]]\nalgorithm = \"als\"\nrank = 9\n");
        let err = parse(&text).unwrap().plans(&[4, 4, 4]).unwrap_err();
        assert!(err.0.starts_with("run[0].ranks"), "{err}");
    }
}
