//! `edm` — deterministic benchmark harness for cost-sensitive early
//! classification of time series.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use edm_core::error::EdmError;

#[derive(Debug)]
pub enum AppError {
    Config(String),
    Data(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            AppError::Data(_) => 3,
        }
    }

    /// Maps library errors: problems with inputs and shapes are data errors,
    /// bad parameter values are configuration errors.
    fn from_edm(e: EdmError) -> AppError {
        match e {
            EdmError::InvalidSpec(_) | EdmError::InvalidParam(_) => {
                AppError::Config(e.to_string())
            }
            _ => AppError::Data(e.to_string()),
        }
    }

    fn config(e: EdmError) -> AppError {
        AppError::Config(e.to_string())
    }

    fn data(e: EdmError) -> AppError {
        AppError::from_edm(e)
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(msg) => write!(f, "config error: {msg}"),
            AppError::Data(msg) => write!(f, "data error: {msg}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "edm",
    about = "Cost-sensitive early time-series classification benchmarks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// UCR TSV training file.
    #[arg(long)]
    train: Option<PathBuf>,
    /// UCR TSV test file.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Trigger model: threshold | stopping-rule | economy-gamma | ecec |
    /// teaser | calimera.
    #[arg(long)]
    trigger: Option<String>,
    /// Base classifier: knn | logistic.
    #[arg(long)]
    classifier: Option<String>,
    /// Linear delay-cost slope.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of monitored timestamps (when no cost spec is given).
    #[arg(long)]
    timestamps: Option<usize>,
    /// Stratified folds for trigger calibration.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results are identical for any value.
    #[arg(long, env = "EDM_JOBS")]
    jobs: Option<usize>,
    /// Output path (reports default to stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Skip z-normalization of the input series.
    #[arg(long)]
    no_normalize: bool,
}

impl CommonArgs {
    fn overrides(&self) -> config::Overrides {
        config::Overrides {
            train: self.train.clone(),
            test: self.test.clone(),
            trigger: self.trigger.clone(),
            classifier: self.classifier.clone(),
            alpha: self.alpha,
            timestamps: self.timestamps,
            folds: self.folds,
            seed: self.seed,
            jobs: self.jobs,
            output: self.output.clone(),
            no_normalize: self.no_normalize,
        }
    }

    fn resolve(&self) -> Result<config::RunConfig, AppError> {
        config::parse_config(self.config.as_deref(), &self.overrides())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit on the training set, score the test set online, write a report.
    Bench(CommonArgs),
    /// Run every (trigger, alpha) combination and write an index CSV.
    Sweep(SweepArgs),
    /// Generate a synthetic train/test pair as UCR TSV files.
    Synth(SynthArgs),
    /// Fit a trigger and dump its parameters as JSON.
    DumpTrigger(CommonArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated trigger models.
    #[arg(long, value_delimiter = ',', required = true)]
    triggers: Vec<String>,
    /// Comma-separated linear delay slopes.
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    n_per_class: usize,
    #[arg(long, default_value_t = 100)]
    length: usize,
    /// Divergence time (1-based) where class 1 gains the mean shift.
    #[arg(long, default_value_t = 40)]
    t_star: usize,
    /// Mean shift of class 1 after the divergence time.
    #[arg(long, default_value_t = 3.0)]
    gap: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_sd: f64,
    /// Train seed; the test half uses seed + 1.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Path prefix for <prefix>_TRAIN.tsv and <prefix>_TEST.tsv.
    #[arg(long, default_value = "synthetic")]
    output: PathBuf,
}

fn configure_jobs(jobs: usize) {
    // Ignore the error when a pool already exists (repeat calls in-process).
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global();
}

fn run() -> Result<(), AppError> {
    match Cli::parse().command {
        Command::Bench(args) => {
            let cfg = args.resolve()?;
            configure_jobs(cfg.jobs);
            commands::cmd_bench(&cfg)
        }
        Command::Sweep(args) => {
            let cfg = args.common.resolve()?;
            configure_jobs(cfg.jobs);
            let out_dir = cfg
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from("sweep-out"));
            commands::cmd_sweep(&cfg, &args.triggers, &args.alphas, &out_dir)
        }
        Command::Synth(args) => {
            let params = commands::SynthParams {
                n_per_class: args.n_per_class,
                length: args.length,
                t_star: args.t_star,
                gap: args.gap,
                noise_sd: args.noise_sd,
                seed: args.seed,
            };
            let (train, test) = commands::cmd_synth(&params, &args.output)?;
            eprintln!("wrote {} and {}", train.display(), test.display());
            Ok(())
        }
        Command::DumpTrigger(args) => {
            let cfg = args.resolve()?;
            configure_jobs(cfg.jobs);
            commands::cmd_dump_trigger(&cfg)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("edm: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
