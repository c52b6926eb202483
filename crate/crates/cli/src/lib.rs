//! Command-line front end for the relay outage toolkit: configuration,
//! the `verify`, `sweep` and `optimize` workflows, and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{cmd_optimize, cmd_sweep, cmd_verify, Report};
use crate::config::{Axis, Format, Overrides, ProtocolChoice, RunConfig};
pub use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "ehrelay",
    version,
    about = "Outage analysis for energy-harvesting relay networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat JSON configuration file; flags below override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Sweep axis.
    #[arg(long, global = true, value_enum)]
    pub axis: Option<Axis>,
    /// Grid as start:stop:step (inclusive).
    #[arg(
        long,
        global = true,
        allow_hyphen_values = true,
        value_name = "START:STOP:STEP"
    )]
    pub grid: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub protocol: Option<ProtocolChoice>,
    /// Monte Carlo seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true, value_name = "N")]
    pub samples: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Cross-check closed form, quadrature and Monte Carlo over a parameter grid.
    Verify,
    /// Optimal outage along the power or distance axis.
    Sweep,
    /// Optimal protocol parameter at the configured operating point.
    Optimize,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            axis: self.axis,
            grid: self.grid.clone(),
            protocol: self.protocol,
            seed: self.seed,
            samples: self.samples,
            out: self.out.clone(),
            format: self.format,
        }
    }
}

/// Runs one command to completion, writing its report. Returns the
/// agreement error after the report is written when `verify` finds a
/// failing point.
pub fn run(cli: &Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(&cli.overrides());
    let resolved = cfg.resolve()?;
    let report: Report = match cli.command {
        Command::Verify => cmd_verify(&resolved)?,
        Command::Sweep => cmd_sweep(&resolved)?,
        Command::Optimize => cmd_optimize(&resolved)?,
    };
    let bytes = output::render(&report.table, resolved.format)?;
    match &resolved.output_path {
        Some(path) => fs::write(path, &bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Io(format!("cannot write output: {e}")))?,
    }
    if report.failures > 0 {
        return Err(CliError::Agreement(format!(
            "{} of {} points failed the agreement check",
            report.failures,
            report.table.rows.len()
        )));
    }
    Ok(())
}
