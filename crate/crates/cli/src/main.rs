//! Command-line driver: coupling curves, sideband cooling maps, cat-state
//! preparation and Wigner functions of stored states.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use optomech::circuit::CircuitError;
use optomech::protocols::ProtocolError;

use crate::config::RunConfig;
use crate::report::{Clock, OutputDir};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("physics diagnostic: {0}")]
    Physics(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Physics(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        if e.is_physics_diagnostic() {
            return CliError::Physics(e.to_string());
        }
        match e {
            ProtocolError::InvalidInput(_) | ProtocolError::Circuit(_) => CliError::Input(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Profile {
    /// Device parameters of Table 1 with the default sweeps.
    Table1,
}

#[derive(Debug, Parser)]
#[command(
    name = "optomech",
    version,
    about = "Transmon-mechanics radiation-pressure simulations"
)]
struct Cli {
    /// TOML or JSON file layered over the profile. A previous report.json
    /// is accepted and reproduces that run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parameter sweeps; defaults to the core count.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Parameter set the config is layered over.
    #[arg(long, global = true, value_enum, default_value = "table1")]
    profile: Profile,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// g0, g0', g0'' and the qubit frequency versus mechanical flux.
    Couplings,
    /// Steady-state phonon number versus detuning, flux and drive strength.
    Cool,
    /// Bell-cat pulse, Hadamard and qubit measurement.
    Cat,
    /// Wigner function of a stored density matrix.
    Wigner {
        /// State file; a transmon-mechanics state is traced over the transmon.
        state: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let Profile::Table1 = cli.profile;
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs: must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let params = cfg.circuit_params()?;
    let clock = Clock::start();
    let mut out = OutputDir::create(&cli.out)?;
    let (name, outcome) = match &cli.command {
        Command::Couplings => ("couplings", commands::couplings(&cfg, &params, &mut out)?),
        Command::Cool => ("cool", commands::cool(&cfg, &params, &mut out)?),
        Command::Cat => ("cat", commands::cat(&cfg, &params, &mut out)?),
        Command::Wigner { state } => ("wigner", commands::wigner_cmd(&cfg, state, &mut out)?),
    };
    let report = clock.report(name, &cfg, &params, outcome.results, outcome.diagnostics);
    out.finish(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("optomech: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
