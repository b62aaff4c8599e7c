//! Batch front end: ingest a chain/policy configuration, run the
//! requested computation with the requested solver, and emit
//! machine-readable results on stdout (diagnostics on stderr).
//!
//! Exit codes: 0 on success, 2 on configuration or validation errors,
//! 3 on numerical failures.

mod config;
mod output;
mod run;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use config::OutputFormat;
use output::OutputDocument;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }
}

#[derive(Parser)]
#[command(
    name = "biparam",
    version,
    about = "Transition probabilities, waiting-region laws, and warranty costs for two-parameter Markov chains"
)]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output format override: csv or json.
    #[arg(long, global = true, value_name = "FORMAT")]
    output: Option<String>,

    /// Override the inversion target (decimal digits, 4..=12).
    #[arg(long, global = true, value_name = "N")]
    digits: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transition matrices P(t, u) at each query point.
    Transition,
    /// Transition matrices plus the marginal law pi(t, u).
    Marginal,
    /// Waiting-region survival and CDF values at each query point.
    Waiting,
    /// Expected warranty expense for the configured policy.
    Warranty,
    /// Run all three solvers and report per-entry deviations.
    Compare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::config("--config PATH is required"))?;
    let run_spec = config::load(path, cli.digits, cli.output.as_deref())?;
    let pool = run::worker_pool()?;

    let results = match cli.command {
        Command::Transition => run::run_transition(&run_spec, &pool)?,
        Command::Marginal => run::run_marginal(&run_spec, &pool)?,
        Command::Waiting => run::run_waiting(&run_spec, &pool)?,
        Command::Warranty => run::run_warranty(&run_spec)?,
        Command::Compare => run::run_compare(&run_spec, &pool)?,
    };

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run_spec.output {
        OutputFormat::Json => {
            let doc = OutputDocument {
                config: run_spec.raw.clone(),
                results,
            };
            output::write_json(&doc, &mut out)
        }
        OutputFormat::Csv => output::write_csv(&results, &mut out),
    }
}
