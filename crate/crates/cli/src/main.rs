//! `qbsim`: charging simulations for transmon quantum batteries.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qbattery::observables::Engine;

use crate::commands::Context;
use crate::config::{RunConfig, Units};
use crate::error::CliResult;

#[derive(Parser, Debug)]
#[command(name = "qbsim", version, about = "Qutrit and qubit quantum-battery charging simulator")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides [output] dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Readout seed; overrides [readout] seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Energy units for reports and the E column.
    #[arg(long, global = true, value_enum)]
    units: Option<Units>,

    /// Force the closed-form or the integrated solution.
    #[arg(long, global = true, value_enum)]
    engine: Option<EngineArg>,

    /// Also write SVG renderings of each figure.
    #[arg(long, global = true)]
    plots: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Analytic,
    Numeric,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the level spectrum of the configured device.
    Spectrum,
    /// Stored energy and populations over [0, t_m]; writes curve.csv.
    Simulate,
    /// Final energy against the protocol phase; writes sweep.csv.
    Sweep,
    /// Time to reach the configured threshold.
    ChargingTime {
        /// Recompute the seven-row qubit charging-time table instead.
        #[arg(long)]
        table1: bool,
    },
    /// Shot-level readout over the sweep grid; writes IQ dumps.
    Readout,
    /// Recompute the qubit charging-time table; writes table1.csv.
    Table1,
}

fn context(cli: &Cli) -> CliResult<Context> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    Ok(Context {
        out_dir: cli.out.clone().unwrap_or_else(|| config.output.dir.clone()),
        units: cli.units.unwrap_or(config.output.units),
        engine: cli.engine.map(|e| match e {
            EngineArg::Analytic => Engine::Analytic,
            EngineArg::Numeric => Engine::Numeric,
        }),
        seed: cli.seed.unwrap_or(config.readout.seed),
        plots: cli.plots || config.output.plots,
        config,
    })
}

fn run(cli: &Cli) -> CliResult<()> {
    let ctx = context(cli)?;
    match cli.command {
        Command::Spectrum => commands::spectrum(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::ChargingTime { table1: true } | Command::Table1 => commands::table(&ctx),
        Command::ChargingTime { table1: false } => commands::charging_time_report(&ctx),
        Command::Readout => commands::readout(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
