//! `nnport`: exact frontiers, the Hopfield heuristic, and frontier metrics.
//!
//! Exit codes: 0 success, 1 data or domain failure, 2 usage failure.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "nnport",
    version,
    about = "Cardinality-constrained mean-variance frontiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace the exact standard frontier on a λ grid.
    Exact(ExactArgs),
    /// Run the Hopfield-network heuristic over a λ sweep.
    Nn(NnArgs),
    /// Compare one heuristic frontier with the standard frontier.
    Metrics(MetricsArgs),
    /// Merge tagged heuristic frontiers and report per-source statistics.
    Merge(MergeArgs),
}

#[derive(Args, Debug)]
pub struct ExactArgs {
    /// OR-Library portfolio file.
    #[arg(long)]
    pub data: PathBuf,
    /// Number of λ values, evenly spaced over [0, 1].
    #[arg(long)]
    pub lambdas: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct NnArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Required number of assets K.
    #[arg(long)]
    pub k: usize,
    /// Lower bound ε applied to every asset.
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub eps: f64,
    /// Upper bound δ applied to every asset.
    #[arg(
        long = "delta-max",
        default_value_t = 1.0,
        allow_negative_numbers = true
    )]
    pub delta_max: f64,
    /// Per-asset bounds, lines `i eps delta` (1-based); overrides --eps/--delta-max.
    #[arg(long)]
    pub bounds: Option<PathBuf>,
    /// λ grid step.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub dlambda: f64,
    /// Population size M.
    #[arg(long, default_value_t = 40)]
    pub pop: usize,
    /// Independent repetitions of the λ sweep.
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gain schedule divisor.
    #[arg(long, default_value_t = 0.95)]
    pub gain_divisor: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Standard frontier CSV.
    #[arg(long)]
    pub standard: PathBuf,
    /// Heuristic frontier CSV.
    #[arg(long)]
    pub heuristic: PathBuf,
    /// Portfolios evaluated by the heuristic; defaults to the heuristic's manifest.
    #[arg(long)]
    pub evaluations: Option<u64>,
    /// Row label in the report.
    #[arg(long, default_value = "NN")]
    pub source: String,
    /// Plain-text report; the CSV form goes to `<out>.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MergeArgs {
    #[arg(long)]
    pub standard: PathBuf,
    /// Tagged frontier files, `TAG=path`.
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<String>,
    /// Merged frontier CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Plain-text report; the CSV form goes to `<report>.csv`.
    #[arg(long)]
    pub report: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Exact(args) => commands::exact(&args),
        Command::Nn(args) => commands::nn(&args),
        Command::Metrics(args) => commands::metrics(&args),
        Command::Merge(args) => commands::merge(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
