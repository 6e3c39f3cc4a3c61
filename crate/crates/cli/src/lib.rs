//! Command-line driver: configuration files, experiment orchestration and
//! CSV emission for the `globalprop` integrators.

/// `println!` that ignores a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ConfigError, RunConfig};
pub use error::CliError;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "GLOBALPROP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "globalprop",
    version,
    about = "Global wave-operator propagation and reference integrators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cumulative integral of the gaussian-packet test function.
    Integrate(commands::integrate::IntegrateArgs),
    /// Vibrational eigenstates of one surface.
    Eigen(commands::eigen::EigenArgs),
    /// Solve for the wave operator of a driven two-surface model.
    Propagate(commands::propagate::PropagateArgs),
    /// Step-by-step propagation with split/SOD or SIL.
    Reference(commands::reference::ReferenceArgs),
    /// Global solution against both step propagators: sweep and timing table.
    Compare(commands::compare::CompareArgs),
}

/// Where the model parameters come from.
#[derive(Debug, Clone, Args)]
pub struct ModelSource {
    /// key=value configuration file.
    #[arg(long, conflicts_with = "example")]
    pub config: Option<PathBuf>,
    /// Built-in parameter set.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub example: Option<u8>,
}

impl ModelSource {
    pub fn load(&self) -> Result<RunConfig, CliError> {
        match (&self.config, self.example) {
            (Some(path), _) => Ok(RunConfig::load(path)?),
            (None, Some(which)) => Ok(RunConfig::example(which)?),
            (None, None) => Err(CliError::Usage("give --config <path> or --example 1|2".into())),
        }
    }
}

/// Comma-separated level list; a leading `v=` is accepted.
pub fn parse_levels(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim().strip_prefix("v=").unwrap_or(s.trim());
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| format!("'{x}' is not a level number"))
        })
        .collect()
}

/// Sizes the global rayon pool from `GLOBALPROP_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // a pool that already exists (repeated calls in one process) keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Integrate(a) => commands::integrate::run(&a),
        Command::Eigen(a) => commands::eigen::run(&a),
        Command::Propagate(a) => commands::propagate::run(&a),
        Command::Reference(a) => commands::reference::run(&a),
        Command::Compare(a) => commands::compare::run(&a),
    }
}
