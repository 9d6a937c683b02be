//! `lcdvf` command-line front end: single runs, batch evaluation over a
//! manifest, parameter sweeps, metrics, distance transforms and parameter
//! learning.

pub mod commands;
pub mod error;
pub mod output;
pub mod settings;

use std::io::Write;

use clap::{Parser, Subcommand};
use serde_json::json;

pub use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "lcdvf", version, about = "Distance-flow active contour segmentation")]
pub struct Cli {
    /// Log progress and timings to stderr (repeat for more)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Segment one mask and report metrics
    Run(commands::RunArgs),
    /// Run every entry of a manifest and report per-item and mean metrics
    Batch(commands::BatchArgs),
    /// Compare a predicted mask with a ground-truth mask
    Metrics(commands::MetricsArgs),
    /// Write the distance transform of a mask as PFM
    Dt(commands::DtArgs),
    /// Fit alpha, beta and kappa maps to one image
    Learn(commands::LearnArgs),
    /// Repeat a run over values of one setting and print CSV
    Sweep(commands::SweepArgs),
}

/// Runs a parsed command, returning the process exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::Run(a) => commands::run(a, stdout).map(|_| 0),
        Command::Batch(a) => commands::batch(a, stdout),
        Command::Metrics(a) => commands::metrics(a, stdout).map(|_| 0),
        Command::Dt(a) => commands::dt(a).map(|_| 0),
        Command::Learn(a) => commands::learn(a, stdout).map(|_| 0),
        Command::Sweep(a) => commands::sweep(a, stdout),
    }
}

/// One-line machine-readable error for stderr.
pub fn error_line(e: &CliError) -> String {
    output::json_line(&json!({ "error": e.message(), "kind": e.kind(), "exit_code": e.exit_code() }))
}
