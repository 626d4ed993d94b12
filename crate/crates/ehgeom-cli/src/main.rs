//! `ehgeom`: sweeps, geodesic integrations, spectral reports, spinor scans
//! and verification runs over Hopf-type hypersurfaces of Eguchi-Hanson space.

mod commands;
mod config;
mod error;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Format, Overrides, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::write_output;

/// Command-line arguments.
#[derive(Debug, Parser)]
#[command(name = "ehgeom", version, about = "Numerical geometry of Hopf-type hypersurfaces in Eguchi-Hanson space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; built-in defaults when absent.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output encoding.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Deformation parameter of the metric.
    #[arg(long, global = true, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Concentration parameter of the test functions and spinors.
    #[arg(long, global = true, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// WK number.
    #[arg(long, global = true, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Quadrature and ODE tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

/// Subcommands.
#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Induced metric, Ricci, scalar and mean curvature over the grid (CSV).
    Geometry,
    /// Geodesic trajectory with its first integrals (CSV).
    Geodesic,
    /// Rayleigh quotients, bound constants and Ricci bounds (JSON).
    Spectral,
    /// Spinor values, Dirac and WK residuals, holonomy over the grid (CSV).
    Spinor,
    /// Pass/fail table of the oracle cross-checks (CSV).
    Verify,
}

fn run(cli: Cli) -> CliResult<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply(&Overrides { out: cli.out, format: cli.format, t: cli.t, eps: cli.eps, lambda: cli.lambda, tol: cli.tol });
    config.validate()?;
    let default_format = match cli.command {
        Command::Spectral => Format::Json,
        _ => Format::Csv,
    };
    let format = config.output.format.unwrap_or(default_format);
    let path = config.output.path.clone();
    let (output, failed) = match cli.command {
        Command::Geometry => (commands::cmd_geometry(&config)?, 0),
        Command::Geodesic => (commands::cmd_geodesic(&config)?, 0),
        Command::Spectral => (commands::cmd_spectral(&config)?, 0),
        Command::Spinor => (commands::cmd_spinor(&config)?, 0),
        Command::Verify => verify::cmd_verify(&config)?,
    };
    write_output(&output, format, path.as_deref())?;
    if failed > 0 {
        return Err(CliError::Verification { failed });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ehgeom: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
