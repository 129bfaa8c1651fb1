//! Experiment driver for the `mbent` binary.
//!
//! Exit codes: 0 success, 1 a `verify` check failed, 2 bad configuration or
//! unwritable output, 3 a brute-force path was asked for a chain beyond the cap.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Format};
use output::{RunManifest, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0} verification check(s) failed")]
    Verification(usize),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<mbent::Error> for CliError {
    fn from(e: mbent::Error) -> Self {
        match e {
            mbent::Error::Input(msg) => CliError::Config(msg),
            e @ mbent::Error::Resource { .. } => CliError::Resource(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mbent",
    version,
    about = "Entanglement dynamics of many-body Ising chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment config; omitted fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Base seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "MBENT_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// E_MW(t) on a time grid, per order.
    Evolve,
    /// Two-point correlations C^X, C^Y, C^Z for single-order kinds.
    Correlate,
    /// Histogram of E_MW over Haar states or over time.
    Distribution,
    /// Averages, spreads, fits and settling times for each family.
    Table1,
    /// Phase-random bound checks and the degenerate-pair count.
    Verify,
    /// E_MW of Haar-random states.
    RandomStates,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Correlate => "correlate",
            Command::Distribution => "distribution",
            Command::Table1 => "table1",
            Command::Verify => "verify",
            Command::RandomStates => "random-states",
        }
    }
}

/// Merges the config file with command-line overrides and validates it.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if let Some(format) = cli.format {
        config.format = format;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

/// Runs one command. On a failed `verify` the report is returned alongside
/// the error so it can still be written.
pub fn execute(
    command: Command,
    config: &ExperimentConfig,
) -> (RunManifest, Result<Table, (Option<Table>, CliError)>) {
    let mut manifest = RunManifest::new(command.name(), config);
    let start = Instant::now();
    let result = match command {
        Command::Evolve => commands::run_evolve(config, &mut manifest),
        Command::Correlate => commands::run_correlate(config, &mut manifest),
        Command::Distribution => commands::run_distribution(config, &mut manifest),
        Command::Table1 => commands::run_table1(config, &mut manifest),
        Command::Verify => commands::run_verify(config, &mut manifest),
        Command::RandomStates => commands::run_random_states(config, &mut manifest),
    };
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    let result = match result {
        Ok(o) if o.failed_checks > 0 => {
            Err((Some(o.table), CliError::Verification(o.failed_checks)))
        }
        Ok(o) => Ok(o.table),
        Err(e) => Err((None, e)),
    };
    (manifest, result)
}

/// Writes `table` to the configured destination.
pub fn write_table(
    table: &Table,
    manifest: &RunManifest,
    config: &ExperimentConfig,
) -> Result<(), CliError> {
    match &config.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
            table.write(manifest, config.format, std::io::BufWriter::new(file))
        }
        None => table.write(manifest, config.format, std::io::stdout().lock()),
    }
}
