//! Configuration-driven experiment runner. Every subcommand resolves a JSON
//! config (embedded defaults overlaid with an optional file), runs one
//! experiment and emits plot data as CSV or JSON.

pub mod commands;
pub mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use commands::{Check, Report};
pub use config::{Experiment, ExperimentConfig};

pub const THREADS_ENV: &str = "UWB_CAP_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] uwbcap_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Parser)]
#[command(name = "uwb-cap", version, about = "Sparse wideband channel capacity experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Coherence time, bandwidth and dimension against delay sparsity
    CoherenceSweep(RunArgs),
    /// Optimal training fraction and estimation error against bandwidth
    EstimationSweep(RunArgs),
    /// Low-snr expansion coefficients against signaling duration
    CoefficientFit(RunArgs),
    /// Non-peaky vs peaky training regions in the sparsity plane
    ScalingRegions(RunArgs),
    /// Cross-check closed forms against Monte Carlo
    McValidate(RunArgs),
    /// Dump the embedded default config of an experiment
    PrintDefaultConfig {
        #[arg(value_enum)]
        experiment: Experiment,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// JSON config overlaid on the experiment defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
}

pub fn resolve_config(experiment: Experiment, args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = ExperimentConfig::load(experiment, args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(out) = &args.out {
        config.output_path = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a non-negative integer, got '{raw}'")))?;
    // 0 lets rayon pick the worker count.
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn write_report(report: &Report, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, &report.primary)?;
            if let Some((ext, body)) = &report.secondary {
                std::fs::write(path.with_extension(ext), body)?;
            }
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(report.primary.as_bytes())?;
            if report.secondary.is_some() {
                eprintln!("note: region map JSON is only written alongside --out");
            }
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let (experiment, args) = match cli.command {
        Command::PrintDefaultConfig { experiment } => {
            println!("{}", output::to_json(&ExperimentConfig::default_for(experiment)));
            return Ok(true);
        }
        Command::CoherenceSweep(a) => (Experiment::CoherenceSweep, a),
        Command::EstimationSweep(a) => (Experiment::EstimationSweep, a),
        Command::CoefficientFit(a) => (Experiment::CoefficientFit, a),
        Command::ScalingRegions(a) => (Experiment::ScalingRegions, a),
        Command::McValidate(a) => (Experiment::McValidate, a),
    };
    let config = resolve_config(experiment, &args)?;
    init_threads()?;
    let report = commands::run(&config)?;
    write_report(&report, config.output_path.as_deref())?;
    for c in &report.checks {
        eprintln!("check {}: {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    Ok(report.checks.iter().all(|c| c.passed))
}

/// Exit codes: 0 success, 1 a result check failed, 2 bad config or runtime
/// error.
pub fn run(cli: Cli) -> ExitCode {
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
