//! `srgm`: reliability-growth fitting, release-time optimization, module
//! prioritization, and release decisions from the command line.
//!
//! Exit codes: 0 success, 2 input validation, 3 numeric failure,
//! 4 fit did not converge (the diagnostic report is still written).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use srgm_core::nhpp::ModelKind;
use srgm_core::{Error, Result};

mod commands;
mod config;
mod csvio;
mod report;

#[derive(Parser)]
#[command(name = "srgm", version, about = "Software reliability growth modeling and release decisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an NHPP model to grouped fault counts.
    Fit(FitArgs),
    /// Compute the cost-optimal release time from a fitted model.
    Optimize(OptimizeArgs),
    /// Rank modules by importance and assign priority categories.
    Prioritize(PrioritizeArgs),
    /// Judge recorded test actuals against the optimal policy.
    Decide(DecideArgs),
    /// Draw fault event times from a model for a fixed seed.
    Simulate(SimulateArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum ModelArg {
    /// Exponential mean curve.
    Go,
    /// S-shaped mean curve.
    Ohba,
    /// Logarithmic mean curve.
    Mo,
}

impl From<ModelArg> for ModelKind {
    fn from(arg: ModelArg) -> ModelKind {
        match arg {
            ModelArg::Go => ModelKind::Go,
            ModelArg::Ohba => ModelKind::Ohba,
            ModelArg::Mo => ModelKind::Mo,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// Fault-count CSV with header `time,cumulative_faults`.
    data: PathBuf,
    /// Model family; falls back to the config's `model` field.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Project configuration JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Fit report, fit result, or bare model parameters (JSON).
    fit: PathBuf,
    /// Project configuration JSON (costs, lifecycle).
    #[arg(long)]
    config: PathBuf,
    /// Previous version's fitted model for the multi-version cost.
    #[arg(long)]
    prev: Option<PathBuf>,
    /// Write a 1000-point (time, expected_cost) CSV here.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PrioritizeArgs {
    /// Module metrics CSV (one row per module).
    metrics: PathBuf,
    /// Project configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Reuse trained network weights instead of training or bypassing.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Save the network used for scoring (trained or loaded) here.
    #[arg(long)]
    save_weights: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecideArgs {
    /// Optimize report or bare release policy (JSON).
    policy: PathBuf,
    /// Per-category actuals CSV.
    #[arg(long)]
    actuals: PathBuf,
    /// Project configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Fit report, fit result, or bare model parameters (JSON).
    params: PathBuf,
    /// Simulation horizon (time units, positive).
    #[arg(long)]
    horizon: f64,
    /// RNG seed; identical seeds reproduce identical event files.
    #[arg(long)]
    seed: u64,
    /// Event CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Fit(args) => commands::cmd_fit(
            &args.data,
            args.model.map(ModelKind::from),
            args.config.as_deref(),
            args.out.as_deref(),
        ),
        Command::Optimize(args) => commands::cmd_optimize(
            &args.fit,
            &args.config,
            args.prev.as_deref(),
            args.curve.as_deref(),
            args.out.as_deref(),
        ),
        Command::Prioritize(args) => commands::cmd_prioritize(
            &args.metrics,
            &args.config,
            args.weights.as_deref(),
            args.save_weights.as_deref(),
            args.out.as_deref(),
        ),
        Command::Decide(args) => commands::cmd_decide(
            &args.policy,
            &args.actuals,
            &args.config,
            args.out.as_deref(),
        ),
        Command::Simulate(args) => {
            commands::cmd_simulate(&args.params, args.horizon, args.seed, args.out.as_deref())
        }
    }
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Input(_) | Error::Domain(_) | Error::UndefinedDeviation(_) => 2,
        Error::Numeric(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}
