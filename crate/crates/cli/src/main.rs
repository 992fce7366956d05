//! `gravicaustic`: simulate bounces, sample the foci and envelope curves, run
//! verification scenarios and parameter sweeps.
//!
//! Exit codes: 0 success, 1 configuration error, 2 abnormal simulation end,
//! 3 verification failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::{SweepRun, EXIT_CONFIG};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "gravicaustic", version, about = "Gravitational billiards in a mirror y = f(x) and their confining curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate bounces; writes trajectory.csv, summary.json, trajectory.svg
    Simulate(RunArgs),
    /// Sample the foci curve; writes foci.csv, summary.json, foci.svg
    Foci(RunArgs),
    /// Sample both envelope curves; writes envelope.csv, summary.json, envelope.svg
    Envelope(RunArgs),
    /// Run a verification scenario; writes report.json
    Verify(VerifyArgs),
    /// Repeat a run over several values of one parameter
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunConfig,
}

impl RunArgs {
    fn config(self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(base.merged(self.run))
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Scenario file
    #[arg(required_unless_present = "config")]
    scenario: Option<PathBuf>,
    /// Scenario file (alternative to the positional argument)
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Output directory for report.json
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    base: RunArgs,
    /// Parameter to vary: x0, y0, vx, vy, g, bounces, L, H, launch_k
    #[arg(long)]
    param: String,
    /// Comma-separated values
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    values: Vec<f64>,
    /// Command run for each value
    #[arg(long, value_enum, default_value_t = SweepRun::Simulate)]
    run: SweepRun,
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Simulate(a) => commands::cmd_simulate(&a.config()?),
        Command::Foci(a) => commands::cmd_foci(&a.config()?),
        Command::Envelope(a) => commands::cmd_envelope(&a.config()?),
        Command::Verify(a) => {
            let path = a.scenario.or(a.config).context("missing scenario file")?;
            commands::cmd_verify(&path, &a.out)
        }
        Command::Sweep(a) => {
            let base = a.base.config()?;
            commands::cmd_sweep(&base, &a.param, &a.values, a.run)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
