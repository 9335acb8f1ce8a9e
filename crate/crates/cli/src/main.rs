use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lassokit::probgen::SignalDist;
use serde::Deserialize;

mod audit;
mod bench;
mod commands;
mod record;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ITER_LIMIT: u8 = 2;
pub const EXIT_SOLVER_FAILURE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "lassokit", version, about = "Weighted one-norm constrained least squares")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the radius-constrained problem described by a manifest.
    Solve(SolveArgs),
    /// Solve the misfit-constrained problem by root finding on the radius.
    Root(RootArgs),
    /// Generate a problem bundle.
    Gen(GenArgs),
    /// Run a sweep described by a TOML file and print a summary CSV.
    Bench(BenchArgs),
    /// Count projection-arc breakpoints on random and extremal lines.
    ArcAudit(AuditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Spg,
    Hybrid,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Spg => "spg",
            SolverKind::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineSearchArg {
    #[default]
    Backtrack,
    ArcFirst,
    ArcGlobal,
}

impl LineSearchArg {
    pub fn as_str(&self) -> &'static str {
        match self {
            LineSearchArg::Backtrack => "backtrack",
            LineSearchArg::ArcFirst => "arc-first",
            LineSearchArg::ArcGlobal => "arc-global",
        }
    }

    pub fn mode(&self) -> lassokit::LineSearchMode {
        match self {
            LineSearchArg::Backtrack => lassokit::LineSearchMode::Backtracking,
            LineSearchArg::ArcFirst => lassokit::LineSearchMode::ArcFirstLocal,
            LineSearchArg::ArcGlobal => lassokit::LineSearchMode::ArcGlobal,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SolveFlags {
    #[arg(long, value_enum, default_value = "hybrid")]
    pub solver: SolverKind,
    /// Relative duality gap at which to stop.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "backtrack")]
    pub line_search: LineSearchArg,
    /// Defaults to ten times the number of rows.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// CSV file for per-iteration data.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub flags: SolveFlags,
}

#[derive(Args, Debug)]
pub struct RootArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub flags: SolveFlags,
    /// Stop once |σ − ‖r‖| / max(σ, 1e-3) falls below this.
    #[arg(long)]
    pub root_tol: Option<f64>,
    #[arg(long)]
    pub max_subproblems: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Gaussian,
    SphereWalk,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: KindArg,
    /// Column decorrelation for `sphere-walk`.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of nonzeros in the planted signal.
    #[arg(long)]
    pub k: usize,
    /// pm_one, uniform or gaussian.
    #[arg(long, default_value = "gaussian")]
    pub dist: SignalDist,
    /// Noise norm relative to ‖Ax₀‖₂.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// τ = tau_mult·‖x₀‖₁ (default 0.99).
    #[arg(long, conflicts_with = "sigma_frac")]
    pub tau_mult: Option<f64>,
    /// Write a misfit-constrained bundle with σ = sigma_frac·‖b‖₂.
    #[arg(long)]
    pub sigma_frac: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    pub config: PathBuf,
    /// Summary CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// One JSON run record per line.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => commands::solve(args),
        Command::Root(args) => commands::root(args),
        Command::Gen(args) => commands::generate(args),
        Command::Bench(args) => bench::run(args),
        Command::ArcAudit(args) => audit::run(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("lassokit: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
