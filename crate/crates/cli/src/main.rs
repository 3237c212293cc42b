//! `qmac`: rate regions, code simulation and property suites for compound quantum
//! multiple-access channels. Data goes to files, diagnostics to stderr.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "qmac", version, about = "Compound quantum multiple-access channel toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace the achievable rate region of a channel set.
    Region(RegionArgs),
    /// Sample hybrid codes and evaluate them on every member.
    Simulate(SimulateArgs),
    /// Run the property suites.
    Verify(VerifyArgs),
    /// Thin a channel set to a θ-net.
    Net(NetArgs),
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Blocking length.
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    /// Restarts per weight pair.
    #[arg(long, default_value_t = 50)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Weight pairs as a:b,c:d,...
    #[arg(long, default_value = "1:0,3:1,1:1,1:3,0:1")]
    pub weights: String,
    /// Alphabet size of the classical sender.
    #[arg(long)]
    pub alphabet: Option<usize>,
    #[arg(long)]
    pub dimension_budget: Option<usize>,
    #[arg(long)]
    pub max_evaluations: Option<usize>,
    /// Close the region under time sharing on a grid of this many steps.
    #[arg(long)]
    pub timeshare_grid: Option<usize>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Block lengths, comma separated.
    #[arg(long, default_value = "1")]
    pub n: String,
    #[arg(long, default_value_t = 2)]
    pub m1: usize,
    #[arg(long, default_value_t = 2)]
    pub m2: usize,
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Distribution of the classical letters, comma separated; uniform if absent.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub encoder_samples: Option<usize>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite name, or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub instances: Option<usize>,
    /// Scale applied to every bound.
    #[arg(long, default_value_t = 1.0)]
    pub tolerance: f64,
    /// Additive slack on every comparison.
    #[arg(long, default_value_t = qmac_core::suites::DEFAULT_TOLERANCE)]
    pub slack: f64,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NetArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Region(a) => commands::region(&a).map(|_| true),
        Command::Simulate(a) => commands::simulate(&a).map(|_| true),
        Command::Verify(a) => commands::verify(&a),
        Command::Net(a) => commands::net(&a).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
