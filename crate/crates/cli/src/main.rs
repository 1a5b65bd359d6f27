#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ttsketch::data::{gen_function_tensor, gen_synthetic, save_dtf, Function};
use ttsketch::theory::{amm_validate, SketchPlan};
use ttsketch::tt::uniform_ranks;

mod compare;
mod config;
mod run;

/// Tensor-train decomposition experiments with TensorSketch.
#[derive(Parser)]
#[command(name = "ttsketch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver configuration in a TOML experiment file.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config's `output`.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Record zero wall times so outputs are byte-identical across runs.
        #[arg(long)]
        deterministic: bool,
    },
    /// Tabulate two or more run summaries.
    Compare {
        #[arg(required = true, num_args = 1..)]
        summaries: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a tensor and save it as DTF.
    Gen {
        kind: GenKind,
        /// Comma-separated mode sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        /// Uniform TT rank (synthetic only).
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the sketch size sufficient for a (1+eps) relative error.
    Bound {
        s: u64,
        q: u32,
        eps: f64,
        delta: f64,
        #[arg(long)]
        json: bool,
    },
    /// Monte-Carlo failure rate of the approximate matrix product property.
    Amm {
        #[arg(long, value_delimiter = ',', default_values_t = [8, 8])]
        dims: Vec<usize>,
        #[arg(short, long, default_value_t = 220)]
        m: usize,
        #[arg(long, default_value_t = 0.5)]
        eps0: f64,
        #[arg(long, default_value_t = 0.2)]
        delta0: f64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Synthetic,
    Sinc,
    Osc,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<ttsketch::Error> for CliError {
    fn from(e: ttsketch::Error) -> Self {
        if e.is_domain() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.into())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Runtime(anyhow::anyhow!("{}: {e}", path.display())))
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run { config, output, deterministic } => {
            run::run_experiment(&config, output.as_deref(), run::RunOptions { deterministic })?;
        }
        Command::Compare { summaries, output } => {
            let rows = compare::load_summaries(&summaries)?;
            print!("{}", compare::table(&rows));
            if let Some(path) = output {
                write_file(&path, &compare::csv(&rows))?;
            }
        }
        Command::Gen { kind, dims, rank, noise, seed, output } => {
            let a = match kind {
                GenKind::Synthetic => gen_synthetic::<f64>(&dims, &uniform_ranks(dims.len(), rank), noise, seed)?.0,
                GenKind::Sinc | GenKind::Osc => {
                    let f = if matches!(kind, GenKind::Sinc) { Function::Sinc } else { Function::Osc };
                    let count = dims.iter().product();
                    gen_function_tensor(f, count, &dims)?
                }
            };
            save_dtf(&a, &output)?;
            println!("wrote {:?} tensor to {}", a.dims(), output.display());
        }
        Command::Bound { s, q, eps, delta, json } => {
            let plan = SketchPlan::new(s, q, eps, delta)?;
            if json {
                println!("{}", serde_json::to_string(&plan).expect("plain struct serializes"));
            } else {
                println!("{}", plan.m);
                eprintln!("binding term: {:?}", plan.binding);
            }
        }
        Command::Amm { dims, m, eps0, delta0, trials, seed } => {
            let rep = amm_validate(&dims, m, eps0, delta0, trials, seed)?;
            println!("{}", serde_json::to_string_pretty(&rep).expect("plain struct serializes"));
        }
    }
    Ok(())
}
