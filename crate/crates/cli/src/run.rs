use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use ttsketch::data::{gen_function_tensor, gen_synthetic, load_dtf, psnr_with, PsnrOptions};
use ttsketch::solver::decompose;
use ttsketch::tt::uniform_ranks;
use ttsketch::{Algorithm, Init, SweepReport, Tensor};

use crate::config::{self, ConfigError, DataKind, DataSpec, ExperimentFile, RunPlan};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub algorithm: Algorithm,
    pub sketch_size: usize,
    pub sigma: f64,
    pub seed: u64,
    pub ranks: Vec<usize>,
    pub init: Init,
    pub max_sweeps: usize,
    pub tol: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub final_rel_change: f64,
    pub final_error: Option<f64>,
    pub final_objective: Option<f64>,
    /// `null` when not requested or when the reconstruction is exact.
    pub psnr: Option<f64>,
    pub total_ms: f64,
    pub mean_sweep_ms: f64,
    pub master_seed: u64,
    pub data: DataSpec,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct RunOptions {
    /// Write zeros for wall-clock columns so repeated runs are byte-identical.
    pub deterministic: bool,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn load_data(spec: &DataSpec, master_seed: u64, base: &Path) -> anyhow::Result<Tensor> {
    let seed = spec.seed.unwrap_or(master_seed);
    Ok(match spec.kind {
        DataKind::Synthetic => {
            let ranks = uniform_ranks(spec.dims.len(), spec.rank.expect("validated"));
            gen_synthetic::<f64>(&spec.dims, &ranks, spec.noise_std, seed)?.0
        }
        DataKind::Sinc | DataKind::Osc => {
            let count = spec.count.unwrap_or_else(|| spec.dims.iter().product());
            gen_function_tensor(spec.function().expect("function kind"), count, &spec.dims)?
        }
        DataKind::File => {
            let path = resolve(base, spec.path.as_deref().expect("validated"));
            load_dtf(&path).with_context(|| format!("loading {}", path.display()))?
        }
    })
}

pub fn csv(report: &SweepReport, deterministic: bool) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let mut out = String::from("sweep,rel_change,recon_rel_err,objective,wall_ms\n");
    for s in &report.sweeps {
        let ms = if deterministic { 0.0 } else { s.wall_ms };
        writeln!(
            out,
            "{},{:e},{},{},{ms:.3}",
            s.sweep,
            s.rel_change,
            opt(s.recon_rel_err),
            opt(s.objective)
        )
        .expect("writing to a String");
    }
    out
}

pub fn run_experiment(path: &Path, output: Option<&Path>, opts: RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let exp: ExperimentFile = config::load(path)?;
    exp.data.validate().map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let a = load_data(&exp.data, exp.seed, base).map_err(CliError::Runtime)?;
    let plans = exp
        .plans(a.dims())
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let out_dir = output.map(Path::to_path_buf).unwrap_or_else(|| resolve(base, &exp.output));
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(CliError::Runtime)?;

    let mut written = Vec::new();
    for plan in &plans {
        log::info!("running {}", plan.name);
        let summary = execute(&a, plan, &exp, opts).map_err(CliError::Runtime)?;
        let csv_path = out_dir.join(format!("{}.csv", plan.name));
        let json_path = out_dir.join(format!("{}.summary.json", plan.name));
        (|| -> anyhow::Result<()> {
            fs::write(&csv_path, csv(&summary.1, opts.deterministic))?;
            fs::write(&json_path, serde_json::to_string_pretty(&summary.0)? + "\n")?;
            Ok(())
        })()
        .with_context(|| format!("writing results for {}", plan.name))
        .map_err(CliError::Runtime)?;
        println!(
            "{}: {} sweeps, error {}",
            plan.name,
            summary.0.sweeps,
            summary.0.final_error.map_or("n/a".into(), |e| format!("{e:.3e}"))
        );
        written.push(json_path);
    }
    Ok(written)
}

fn execute(a: &Tensor, plan: &RunPlan, exp: &ExperimentFile, opts: RunOptions) -> anyhow::Result<(Summary, SweepReport)> {
    let (tt, mut report) = decompose(a, &plan.config)?;
    let psnr = if exp.data.psnr {
        let full = tt.full()?;
        let v = psnr_with(a, &full, PsnrOptions { peak: exp.data.peak, standard: false })?;
        v.is_finite().then_some(v)
    } else {
        None
    };
    if opts.deterministic {
        report.total_ms = 0.0;
        for s in &mut report.sweeps {
            s.wall_ms = 0.0;
        }
    }
    let last = report.last().cloned();
    let summary = Summary {
        name: plan.name.clone(),
        algorithm: plan.algorithm,
        sketch_size: plan.sketch_size,
        sigma: plan.sigma,
        seed: plan.seed,
        ranks: plan.ranks.clone(),
        init: plan.init,
        max_sweeps: plan.max_sweeps,
        tol: plan.tol,
        sweeps: report.sweeps.len(),
        converged: report.converged,
        final_rel_change: last.as_ref().map_or(f64::NAN, |s| s.rel_change),
        final_error: last.as_ref().and_then(|s| s.recon_rel_err),
        final_objective: last.as_ref().and_then(|s| s.objective),
        psnr,
        total_ms: report.total_ms,
        mean_sweep_ms: report.mean_sweep_ms(),
        master_seed: exp.seed,
        data: exp.data.clone(),
    };
    Ok((summary, report))
}
