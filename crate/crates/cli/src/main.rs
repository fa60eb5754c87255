//! `vortexlab`: runs point-vortex experiments from JSON configs and writes
//! CSV tables plus a JSON summary.
//!
//! Exit codes: 0 all checks passed, 1 a tolerance check failed,
//! 2 configuration or I/O error, 3 numerical halt.

// `!(x > 0.0)` also rejects NaN from the config
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod emit;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use vortex_core::VortexError;

use config::{ExperimentConfig, ExperimentKind};
use run::Overrides;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical halt: {0}")]
    Numerical(#[from] VortexError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "vortexlab", version, about = "Point-vortex experiments on closed surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate vortices and circulations; writes trajectory.csv
    Simulate(RunArgs),
    /// Pair-versus-geodesic sweep over separations; writes kimura.csv
    Kimura(RunArgs),
    /// Integrate one unit-speed geodesic; writes geodesic.csv
    Geodesic(RunArgs),
    /// Check symmetry, zero mean and Laplacian of the Green function
    GreenCheck(RunArgs),
    /// Boundary geodesic residual of the doubled disk
    SchottkyCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON)
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the time step
    #[arg(long)]
    dt: Option<f64>,
    /// Override the sampling seed
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Kimura(a) => (ExperimentKind::Kimura, a),
        Command::Geodesic(a) => (ExperimentKind::Geodesic, a),
        Command::GreenCheck(a) => (ExperimentKind::GreenCheck, a),
        Command::SchottkyCheck(a) => (ExperimentKind::SchottkyCheck, a),
    };
    let result = ExperimentConfig::load(&args.config)
        .and_then(|cfg| run::run(&kind, &cfg, &args.out, Overrides { dt: args.dt, seed: args.seed }));
    match result {
        Ok(summary) => {
            for c in summary.checks.iter().filter(|c| !c.pass) {
                eprintln!("check {} failed: {:e} > {:e}", c.name, c.value, c.tolerance);
            }
            let verdict = if summary.pass { "pass" } else { "FAIL" };
            println!("{}: {verdict}, summary in {}", kind.name(), args.out.join("summary.json").display());
            if summary.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("vortexlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
