//! Batch experiment driver: parses a TOML scenario configuration, runs the
//! requested computation, and emits machine-readable tables.
//!
//! Exit codes: 0 success, 2 configuration error, 3 validation failure,
//! 4 enumeration budget refusal.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use peerlab_core::error::Error as CoreError;

use crate::config::ConfigFile;
use crate::output::{emit, Format};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Validation(String),
    Budget(String),
    Io(String),
}

impl CliError {
    fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    fn validation(e: impl std::fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Budget(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Validation(m) | CliError::Budget(m) | CliError::Io(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::EnumerationBudget { .. } => CliError::Budget(e.to_string()),
            CoreError::InvalidProbability { .. }
            | CoreError::InvalidPrior { .. }
            | CoreError::InvalidProficiency(_)
            | CoreError::NegativeCost(_)
            | CoreError::NegativeBeta(_)
            | CoreError::InvalidGridStep(_)
            | CoreError::EnumerationNeedsFixedAssignment
            | CoreError::NoClosedForm(_)
            | CoreError::InvalidDeviation(_) => CliError::Config(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "peerlab",
    about = "Experiment driver for a multi-task peer-agreement reward mechanism",
    version
)]
struct Cli {
    /// Path to the TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the run seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the Monte Carlo trial count from the configuration.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Directory for output tables (defaults to stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: FormatArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a task assignment with reference raters and statistic sets,
    /// validate it, and emit the assignment table.
    Assign,
    /// Estimate per-agent expected rewards and payments under the
    /// configured profile.
    Simulate {
        /// Also dump the first N trials as an event table.
        #[arg(long)]
        dump_trials: Option<u64>,
    },
    /// Verify equilibrium claims: candidate-deviation table (verify mode),
    /// symmetric grid scan (scan mode), or low-effort escape gains
    /// (escape mode).
    Equilibrium,
    /// Print closed-form values for the configured parameters.
    Analytic,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let raw = std::fs::read(config_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let text = String::from_utf8(raw.clone())
        .map_err(|e| CliError::Config(format!("config is not UTF-8: {e}")))?;
    let config = ConfigFile::parse(&text)?;
    let hash = {
        let digest = Sha256::digest(&raw);
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    };

    let tables = match &cli.command {
        Command::Assign => commands::cmd_assign(&config, cli.seed)?,
        Command::Simulate { dump_trials } => {
            commands::cmd_simulate(&config, cli.seed, cli.trials, *dump_trials)?
        }
        Command::Equilibrium => commands::cmd_equilibrium(&config, cli.seed, cli.trials)?,
        Command::Analytic => commands::cmd_analytic(&config)?,
    };

    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    emit(&tables, format, cli.out.as_deref(), &hash, config.seed(cli.seed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
