//! Command-line front end.
//!
//! Every command resolves its parameters from defaults, then an optional JSON
//! file (`--config`), then explicit flags. The resolved record is logged and,
//! when `--out` is given, written as a `*.config.json` sidecar next to the output.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or config error, 3 numerical integrity error.

pub mod check;
pub mod commands;
pub mod config;
pub mod table;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::estimator::EstimatorError;
use crate::protocol::ProtocolError;
use crate::qcore::QError;

pub use table::{fmt_sig12, CsvTable};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("numerical integrity error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 2,
        }
    }

    pub(crate) fn csv(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<QError> for CliError {
    fn from(e: QError) -> Self {
        match e {
            QError::NumericalIntegrity(_) => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dment",
    version,
    about = "Direct entanglement measurement: simulation and certified bounds"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Base random seed (default 0)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON file with command parameters; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error bound and concurrence bound versus N for exponent choices (CSV)
    Fig1(commands::Fig1Args),
    /// All (K, r) at fixed N, optionally with the tradeoff frontier (CSV)
    Scatter(commands::ScatterArgs),
    /// Monte Carlo protocol simulation from a JSON config
    Simulate(commands::SimulateArgs),
    /// Single certified estimate from (V_m, N, K, r) (JSON)
    Estimate(commands::EstimateArgs),
    /// Product-state bound check plus the counterexample refutation
    CheckBound(commands::CheckBoundArgs),
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.common;
    match cli.command {
        Command::Fig1(a) => commands::fig1(&common, &a),
        Command::Scatter(a) => commands::scatter(&common, &a),
        Command::Simulate(a) => commands::simulate(&common, &a),
        Command::Estimate(a) => commands::estimate(&common, &a),
        Command::CheckBound(a) => commands::check_bound(&common, &a),
    }
}

/// `out` with its extension replaced by `suffix` (e.g. `fig1.csv` -> `fig1.config.json`).
pub fn sibling_path(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}
