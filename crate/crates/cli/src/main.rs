//! `riskroute` command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input or I/O error.

mod commands;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use riskroute::solver::SolverConfig;
use riskroute::RiskModel;

#[derive(Parser)]
#[command(name = "riskroute", version, about = "Risk-averse Wardrop equilibria and price-of-risk-aversion bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file, plus an oracle sidecar for the recursive families.
    Generate(GenerateArgs),
    /// Solve for the risk-averse and risk-neutral equilibria.
    Solve(SolveArgs),
    /// Solve, then evaluate every bound and write a bound CSV.
    Analyze(SolveArgs),
    /// Check a generated instance against its oracle sidecar.
    Verify(VerifyArgs),
    /// Evaluate bounds over a grid of instances and write one CSV.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Structural,
    Functional,
    /// Level-one structural instance on the Braess graph.
    Braess,
    /// Deterministic textbook Braess network.
    BraessClassic,
    /// Domino with ears, seeded random affine functions.
    Domino,
    /// Seeded random DAG with affine functions.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    MeanVar,
    MeanStdev,
}

impl From<Model> for RiskModel {
    fn from(m: Model) -> Self {
        match m {
            Model::MeanVar => RiskModel::MeanVar,
            Model::MeanStdev => RiskModel::MeanStdev,
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct SolverArgs {
    /// Relative residual at which the solver stops.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long = "max-iters", default_value_t = 100_000)]
    max_iters: usize,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig { tolerance: self.tolerance, max_iterations: self.max_iters, ..SolverConfig::default() }
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, default_value_t = 1)]
    level: u32,
    #[arg(long = "gamma-kappa", default_value_t = 1.0)]
    gamma_kappa: f64,
    /// Risk-averse demand of the structural family.
    #[arg(long = "r-a", default_value_t = 1.0)]
    r_a: f64,
    /// Risk-neutral demand of the structural family.
    #[arg(long = "r-n", default_value_t = 1.0)]
    r_n: f64,
    #[arg(long = "risk-model", value_enum, default_value_t = Model::MeanVar)]
    risk_model: Model,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance file to write; defaults to a name derived from the flags.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "out-dir", env = "RISKROUTE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    instance: PathBuf,
    /// Overrides the instance's risk-aversion coefficient.
    #[arg(long)]
    gamma: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "out-dir", env = "RISKROUTE_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    instance: PathBuf,
    /// Oracle sidecar; defaults to the one written by `generate`.
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Bound CSV to write.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "out-dir", env = "RISKROUTE_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepFamily {
    Structural,
    Functional,
    /// Seeded random DAGs, labelled synthetic.
    Random,
    /// Experimental: seeded mean-stdev instances checked against `1 + γκη`.
    Conjecture,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    family: SweepFamily,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u32, 2, 3, 4])]
    levels: Vec<u32>,
    #[arg(long = "gamma-kappa", value_delimiter = ',', default_values_t = vec![1.0])]
    gamma_kappa: Vec<f64>,
    #[arg(long = "r-a", default_value_t = 1.0)]
    r_a: f64,
    #[arg(long = "r-n", default_value_t = 1.0)]
    r_n: f64,
    #[arg(long = "risk-model", value_enum, default_value_t = Model::MeanVar)]
    risk_model: Model,
    /// Instances per random sweep.
    #[arg(long, default_value_t = 50)]
    samples: u64,
    /// Latency degree for the random sweep; 1 means affine.
    #[arg(long, default_value_t = 1)]
    degree: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "out-dir", env = "RISKROUTE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    CheckFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Sweep(a) => sweep::run(&a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(2)
        }
    }
}

/// The error chain joined by `: `, skipping causes already quoted by the
/// message above them.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}
