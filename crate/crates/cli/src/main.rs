mod analyze;
mod compare;
mod output;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Offline 802.11 active-scanning analysis and scan-policy simulation.
///
/// Exit status: 0 on success, 1 when an input file cannot be read or
/// parsed, 2 when a configuration (thresholds, scenario, flags) is invalid.
#[derive(Debug, Parser)]
#[command(name = "scanlens", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Label every scanning episode in a capture and compute traffic metrics.
    Analyze {
        /// pcap file with radiotap or prism headers.
        capture: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic capture and its ground-truth sidecar.
    Simulate {
        /// Scenario description in TOML.
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Replay a scenario under both scan policies and tabulate the outcome.
    Compare {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML file overriding inference thresholds.
    #[arg(long, env = "SCANLENS_THRESHOLDS")]
    thresholds: Option<PathBuf>,
    #[arg(long, value_enum, env = "SCANLENS_FORMAT", default_value = "json")]
    format: Format,
    /// Metric bin width in seconds.
    #[arg(long, env = "SCANLENS_BIN", default_value_t = 60.0)]
    bin: f64,
    /// Episode gap threshold in seconds; overrides the thresholds file.
    #[arg(long, env = "SCANLENS_GAP")]
    gap: Option<f64>,
    /// Output directory. Reports go to stdout when omitted.
    #[arg(long, env = "SCANLENS_OUT")]
    out: Option<PathBuf>,
    /// Replaces the scenario's seed.
    #[arg(long, env = "SCANLENS_SEED")]
    seed: Option<u64>,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Config(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Config(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Config(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Analyze { capture, common } => analyze::run(&capture, &common),
        Command::Simulate { scenario, common } => simulate::run(&scenario, &common),
        Command::Compare { scenario, common } => compare::run(&scenario, &common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scanlens: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
