//! `keyrate` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid arguments, 3 no threshold.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] keyrate::Error),
    #[error("no threshold: {0}")]
    NoThreshold(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Model(_) => 2,
            CliError::NoThreshold(_) => 3,
            CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "keyrate", version, about = "QKD secret-key rates with coarse-grained and refined error correction")]
pub struct Cli {
    /// Read `key = value` defaults from this file; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the key rate at one operating point.
    Rate(RateArgs),
    /// Find the lowest tolerable transmittance or the highest tolerable error rate.
    Threshold(ThresholdArgs),
    /// Rates of both modes along a transmittance grid.
    Sweep(SweepArgs),
    /// Transmittance thresholds of both modes along an error-rate grid.
    Curve(CurveArgs),
    /// Monte Carlo simulation compared against the closed-form model.
    Mc(McArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Bb84,
    Ddi,
    Di,
}

impl From<SchemeArg> for keyrate::Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Bb84 => keyrate::Scheme::Bb84,
            SchemeArg::Ddi => keyrate::Scheme::Ddi,
            SchemeArg::Di => keyrate::Scheme::Di,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Coarse,
    Refined,
    Both,
}

impl ModeArg {
    pub fn modes(self) -> Vec<keyrate::Mode> {
        match self {
            ModeArg::Coarse => vec![keyrate::Mode::Coarse],
            ModeArg::Refined => vec![keyrate::Mode::Refined],
            ModeArg::Both => keyrate::Mode::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Vary {
    Eta,
    Es,
}

/// Physical parameters of an operating point.
#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    /// Single-click fraction P_s (bb84).
    #[arg(long)]
    pub ps: Option<f64>,
    /// Transmittance (ddi), or both link transmittances (di).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Source-to-Alice transmittance (di).
    #[arg(long)]
    pub eta_a: Option<f64>,
    /// Source-to-Bob transmittance (di).
    #[arg(long)]
    pub eta_b: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Error-correction inefficiency factor (>= 1).
    #[arg(long, default_value_t = 1.0)]
    pub f: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Single-event error rate e_s.
    #[arg(long, default_value_t = 0.0)]
    pub es: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    /// Parameter to solve for.
    #[arg(long, value_enum)]
    pub vary: Vary,
    /// Fixed e_s when varying eta.
    #[arg(long)]
    pub es: Option<f64>,
    /// Fixed P_s (bb84) when varying es.
    #[arg(long)]
    pub ps: Option<f64>,
    /// Fixed transmittance when varying es (di: both links).
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0.0)]
    pub es: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0.0)]
    pub es_min: f64,
    #[arg(long, default_value_t = 0.11)]
    pub es_max: f64,
    #[arg(long, default_value_t = 23)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 0.0)]
    pub es: f64,
    /// Number of simulated signals.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn run(args: Vec<String>) -> Result<(), CliError> {
    let args = config::merge_config_file(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::Rate(a) => commands::rate(a, &mut out)?,
        Command::Threshold(a) => commands::threshold(a, &mut out)?,
        Command::Sweep(a) => commands::sweep(a, &mut out)?,
        Command::Curve(a) => commands::curve(a, &mut out)?,
        Command::Mc(a) => commands::mc(a, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("keyrate: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
