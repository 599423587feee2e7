use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

/// Command failures, each with its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or scenario: 2.
    Usage(String),
    /// A validation check failed: 1.
    Validation(String),
    /// The energy search has no feasible point: 3.
    Infeasible(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Validation(_) => 1,
            Self::Usage(_) | Self::Io(_) => 2,
            Self::Infeasible(_) => 3,
        }
    }
}

impl From<wurx::Error> for CliError {
    fn from(e: wurx::Error) -> Self {
        match e {
            wurx::Error::Infeasible { .. } => Self::Infeasible(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) | Self::Validation(m) | Self::Infeasible(m) | Self::Io(m) => f.write_str(m),
        }
    }
}

/// Flags shared by every command. Each can also be set in the `--config` file
/// under the same name.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trials or packets; accepts `1e6`.
    #[arg(long, visible_alias = "mc-trials", value_parser = config::parse_count)]
    pub trials: Option<u64>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated SNRs in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub snr: Vec<f64>,
}

#[derive(Parser, Debug)]
#[command(name = "wurx", version, about = "Wake-up receiver detection analysis and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic and simulated P_FA / P_D over a threshold grid.
    Roc(commands::roc::RocArgs),
    /// Energy-optimal detector settings per SNR.
    Energy(commands::energy::EnergyArgs),
    /// Packet-level receiver runs.
    Simulate(commands::simulate::SimulateArgs),
    /// Normalised sensitivity and figure of merit of the comparison designs.
    Fom(commands::fom::FomArgs),
    /// Analytic-versus-simulation agreement matrix.
    Validate(commands::validate::ValidateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Roc(a) => commands::roc::run(a),
        Command::Energy(a) => commands::energy::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Fom(a) => commands::fom::run(a),
        Command::Validate(a) => commands::validate::run(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
