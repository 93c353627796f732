use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod output;

use output::{CliError, EXIT_USAGE};

/// Hyperbolic GAF zero counting, exact L = 1 laws and large-deviation rates.
#[derive(Debug, Parser)]
#[command(name = "hypgaf", version)]
struct Cli {
    /// Cap on worker threads for replicated experiments.
    #[arg(long, global = true, env = "HYPGAF_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw truncated GAF coefficients to CSV.
    Sample(SampleArgs),
    /// Count zeros in |z| <= r by winding number and/or polynomial roots.
    Count(CountArgs),
    /// Evaluate the closed-form rate function or deviation constant.
    Rate(RateArgs),
    /// Exact L = 1 count distribution to CSV.
    Dist(DistArgs),
    /// Estimate P[n(r) >= V].
    Tail(TailArgs),
    /// Run a tabulated experiment.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long = "L")]
    pub l: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub eps_tail: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CountMethodArg {
    Winding,
    Roots,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    /// Coefficient CSV (n,re,im). A sidecar manifest from `sample` restores
    /// the truncation tail and validity radius.
    #[arg(long = "in", conflicts_with_all = ["l", "seed", "sample_r"])]
    pub input: Option<PathBuf>,
    /// Intensity for a fresh sample when --in is absent.
    #[arg(long = "L")]
    pub l: Option<f64>,
    /// Validity radius of a fresh sample; defaults to --r.
    #[arg(long)]
    pub sample_r: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub eps_tail: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Counting radius.
    #[arg(long)]
    pub r: f64,
    #[arg(long, value_enum, default_value_t = CountMethodArg::Both)]
    pub method: CountMethodArg,
    #[arg(long, default_value_t = 1 << 20)]
    pub max_nodes: usize,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("point").required(true).args(["x", "t"])))]
pub struct RateArgs {
    #[arg(long)]
    pub alpha: f64,
    /// Evaluate the rate function at x.
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Evaluate the two-sided deviation constant c(t).
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Also compute the Legendre transform numerically and report the difference.
    #[arg(long)]
    pub numeric_check: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct DistArgs {
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub eps_tv: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TailMethodArg {
    Exact,
    Mc,
    Tilted,
}

#[derive(Debug, Args, Serialize)]
pub struct TailArgs {
    #[arg(long = "L", default_value_t = 1.0)]
    pub l: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long = "V")]
    pub v: u64,
    #[arg(long, value_enum)]
    pub method: TailMethodArg,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Total-variation budget of the truncated L = 1 law (exact and tilted).
    #[arg(long, default_value_t = 1e-12)]
    pub eps_tv: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub eps_tail: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentName {
    Moments,
    Deviation,
    Overcrowding,
    Certificate,
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub name: ExperimentName,
    #[arg(long)]
    pub out: PathBuf,
    /// Intensity (moments, certificate).
    #[arg(long = "L", default_value_t = 1.0)]
    pub l: f64,
    /// Radii, comma separated (moments, overcrowding, certificate).
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    /// Replicates per radius (moments).
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Deviation scale exponent (deviation).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Deviation size in units of v1^alpha (deviation).
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1)]
    pub j_min: u32,
    #[arg(long, default_value_t = 10)]
    pub j_max: u32,
    /// Error tolerance on log-probabilities (deviation, overcrowding).
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Constant C in V = ceil(C (1/(1-r)) log(1/(1-r))) (overcrowding).
    #[arg(long, default_value_t = hypgaf::mc_engine::DEFAULT_ASSUMPTION_CONSTANT)]
    pub v_constant: f64,
    /// Fixed threshold instead of the C rule (overcrowding).
    #[arg(long = "V")]
    pub v: Option<u64>,
    /// Forced zero counts, comma separated (certificate).
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ClapKind::DisplayHelp | ClapKind::DisplayVersion) {
                e.exit();
            }
            let err = CliError::Usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let threads = cli.threads;
    match hypgaf::exec::with_threads(threads, || commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code())
        }
    }
}
