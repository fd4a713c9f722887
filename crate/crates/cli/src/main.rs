//! `cubeq`: runs one check per invocation and writes a JSON report.
//!
//! Exit codes: 0 verified or converged, 1 checked and failed, 2 usage,
//! configuration or resource error.

mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{BackendChoice, Config};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(cubeq_core::Error),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<cubeq_core::Error> for CliError {
    fn from(e: cubeq_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "cubeq",
    version,
    about = "Cubic integrability checks for four-site R-matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration; `d` is required when a file is given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Zero all timings so identical runs give identical reports.
    #[arg(long, global = true)]
    deterministic: bool,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendChoice>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Kitaev solution of the cubic equation, exactly and on a grid.
    VerifyKitaev,
    /// User R-matrices `r_matrices.r1..r4` in the cubic equation.
    VerifyCubic,
    /// Row identity of the railway argument.
    Railway,
    /// Commutativity of plane transfer matrices at two parameters.
    TransferCommute,
    /// First-order term of the Kitaev transfer matrix.
    ExtractHamiltonian,
    /// `Tr T^N` for the two-plane transfer matrix.
    Partition,
    /// Yang-Baxter residual of a two-site matrix.
    YbCheck,
    /// Alternating least-squares search for `R3, R4`.
    SearchIntertwiner,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyKitaev => "verify-kitaev",
            Command::VerifyCubic => "verify-cubic",
            Command::Railway => "railway",
            Command::TransferCommute => "transfer-commute",
            Command::ExtractHamiltonian => "extract-hamiltonian",
            Command::Partition => "partition",
            Command::YbCheck => "yb-check",
            Command::SearchIntertwiner => "search-intertwiner",
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(backend) = cli.backend {
        config.backend = Some(backend);
    }
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    let mut report = commands::execute(cli.command, &config)?;
    if cli.deterministic {
        commands::strip_timing(&mut report.body);
    }
    let passed = report.passed;
    let text = serde_json::to_string_pretty(&report.into_json(cli.command))
        .map_err(|e| CliError::Io(format!("cannot serialize report: {e}")))?;
    match &cli.report {
        Some(path) => fs::write(path, text + "\n")
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("cubeq {}: {e}", cli.command.name());
            ExitCode::from(2)
        }
    }
}
