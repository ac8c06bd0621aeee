//! `lnmix`: simulate grouped income data, fit the lognormal mixture or GB2
//! model, and report posterior summaries.
//!
//! Exit codes: 0 on success, 2 for bad input or configuration, 3 when the
//! numerics fail at run time.

mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "lnmix", version, about = "Bayesian lognormal mixtures for grouped income data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a sample from a TOML spec and write its grouped tabulation.
    Simulate(SimulateArgs),
    /// Fit the lognormal mixture with an unknown number of components.
    Fit(FitArgs),
    /// Fit the GB2 baseline by random-walk Metropolis.
    FitGb2(FitGb2Args),
    /// Summarise (pooled) draws: Gini, R posterior, marginal likelihood, predictive density.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// TOML spec with `n`, `groups` and a `[dgp]` table.
    #[arg(long)]
    pub spec: PathBuf,
    /// Grouped-data CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Raw-sample CSV; defaults to the output path with extension `raw.csv`.
    #[arg(long)]
    pub raw: Option<PathBuf>,
    /// Do not write the raw sample.
    #[arg(long, conflicts_with = "raw")]
    pub no_raw: bool,
}

#[derive(Args)]
pub struct ChainArgs {
    /// Grouped-data CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub iterations: u64,
    #[arg(long, default_value_t = 20_000)]
    pub burn_in: u64,
    #[arg(long, default_value_t = 10)]
    pub thin: u64,
    /// Master seed; with several chains each gets a derived seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub chains: u64,
    /// Output directory for `chain-<i>.csv` and `chain-<i>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// TOML prior; omitted keys keep their defaults.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub initial_r: usize,
    /// Hold R at `--initial-r`.
    #[arg(long)]
    pub fixed_r: bool,
    /// Check every state invariant after each sweep.
    #[arg(long)]
    pub check_invariants: bool,
}

#[derive(Args)]
pub struct FitGb2Args {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// TOML sampler settings (step sizes, priors, initial values).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Initial step size for all four parameters.
    #[arg(long)]
    pub step_size: Option<f64>,
    /// Keep the initial step sizes throughout.
    #[arg(long)]
    pub no_adapt: bool,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Draws CSV files (pooled); each needs its JSON sidecar.
    #[arg(long, required = true, num_args = 1..)]
    pub draws: Vec<PathBuf>,
    /// The grouped data the draws were fitted to.
    #[arg(long)]
    pub data: PathBuf,
    /// Restrict to draws with this many components.
    #[arg(long)]
    pub condition_r: Option<usize>,
    /// Predictive grid `lo:hi:steps`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::FitGb2(a) => commands::fit_gb2(&a),
        Command::Report(a) => commands::report(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .any(|cause| cause.downcast_ref::<lnmix::Error>().is_some_and(lnmix::Error::is_numerical));
    if numerical {
        3
    } else {
        2
    }
}
