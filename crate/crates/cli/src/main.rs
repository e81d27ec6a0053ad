//! `wlra`: generate instances, sweep solvers over ranks, summarize results
//! and replay the communication game.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod comm_demo;
mod dataset;
mod generate;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wlra::data::MatrixFormat;
use wlra::solvers::SolverKind;

/// Exit status for malformed invocations.
pub const EXIT_USAGE: u8 = 1;
/// Exit status for I/O, parse and numerical failures.
pub const EXIT_RUNTIME: u8 = 2;

/// Failure classified by exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<wlra::Error> for CliError {
    fn from(e: wlra::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Parser, Debug)]
#[command(
    name = "wlra",
    version,
    about = "Weighted low rank approximation benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded instance (A, W and extras) plus an instance.json sidecar.
    Generate(GenerateArgs),
    /// Run solvers over ranks and trials and write a results CSV.
    Run(RunArgs),
    /// Summarize a results CSV by solver and rank.
    Report(ReportArgs),
    /// Build a block-diagonal mask instance and account message bits.
    CommDemo(CommDemoArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: GenerateSource,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: MatrixFormat,
    /// Output directory; overrides an `out=` key.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct GenerateSource {
    /// Mixture of Gaussians: `n=.. d=.. k=.. r=.. seed=.. [out=DIR]`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub mog: Option<Vec<String>>,
    /// Planted low rank: `n=.. d=.. k=.. r=.. noise=.. seed=.. [out=DIR]`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub planted: Option<Vec<String>>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Directory written by `generate`.
    #[arg(long, conflicts_with_all = ["mog", "planted"])]
    pub data: Option<PathBuf>,
    /// Generate a mixture instance in memory: `n=.. d=.. k=.. r=.. seed=..`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE", conflicts_with = "planted")]
    pub mog: Option<Vec<String>>,
    /// Generate a planted instance in memory: `n=.. d=.. k=.. r=.. noise=.. seed=..`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub planted: Option<Vec<String>>,
    /// Matrix format of `--data`; detected from file names when omitted.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<MatrixFormat>,
    /// Comma-separated solver names.
    #[arg(long, value_delimiter = ',', value_parser = parse_solver,
          default_value = "svd_w,em,greedy,sample,adam,svd")]
    pub solvers: Vec<SolverKind>,
    /// Ascending ranks: `1..20` (inclusive) or `5,10,20`.
    #[arg(long, default_value = "1..20")]
    pub ranks: String,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Base seed; trial `t` uses `seed + t`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Vary the generated instance per trial instead of the solver seed.
    #[arg(long)]
    pub instance_trials: bool,
    /// Rank multiplier for svd_w and css (they output rank `weight_rank·k`).
    #[arg(long, default_value_t = 1)]
    pub weight_rank: usize,
    #[arg(long, default_value_t = wlra::solvers::EM_DEFAULT_ITERS)]
    pub em_iters: usize,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Rows drawn by `sample`; defaults to `10·k`.
    #[arg(long)]
    pub sample_t: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub css_eps: f64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Results CSV path; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
    /// Also write a gnuplot script of mean loss against rank.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Results CSV written by `run`.
    pub results: PathBuf,
    /// Only these ranks, e.g. `5,10,20`.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    /// Write the summary CSV here instead of after the table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CommDemoArgs {
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub r: usize,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Off-support entries are uniform in `[-amplitude, amplitude]`; 0 keeps copies.
    #[arg(long, default_value_t = 3)]
    pub amplitude: i64,
}

fn parse_format(s: &str) -> Result<MatrixFormat, String> {
    s.parse().map_err(|e: wlra::Error| e.to_string())
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: wlra::Error| e.to_string())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(args) => generate::cmd_generate(&args),
        Command::Run(args) => run::cmd_run(&args),
        Command::Report(args) => report::cmd_report(&args),
        Command::CommDemo(args) => comm_demo::cmd_comm_demo(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
