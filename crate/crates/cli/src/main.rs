//! `rieszgas`: configuration driven experiments on confined Riesz and Coulomb gases.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "rieszgas", version, about = "Sample and analyse confined Riesz and Coulomb gases")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `sampler.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for concurrent runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one chain and write trace, snapshot and diagnostics.
    Sample,
    /// Solve the radial Coulomb equilibrium problem and check it.
    Equilibrium,
    /// Tabulate the field whose equilibrium is a uniform ball.
    Prescribe,
    /// Run `sample` for every N in `study.n_values`.
    ConvergenceStudy,
    /// Recompute diagnostics for a snapshot CSV.
    Diagnose {
        #[arg(long)]
        snapshot: PathBuf,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparsable or out-of-range configuration.
    Config(String),
    Core(rieszgas::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use rieszgas::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Usage(_) | E::Parse(_)) => 2,
            CliError::Core(E::Unsupported(_) | E::FieldTooWeak(_) | E::MethodUnavailable(_)) => 3,
            CliError::Core(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<rieszgas::Error> for CliError {
    fn from(e: rieszgas::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(rieszgas::Error::Io(e))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot set up {k} threads: {e}")))?;
    }
    let path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.sampler.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    match cli.command {
        Command::Sample => commands::sample(&cfg),
        Command::Equilibrium => commands::equilibrium(&cfg),
        Command::Prescribe => commands::prescribe(&cfg),
        Command::ConvergenceStudy => commands::convergence_study(&cfg),
        Command::Diagnose { snapshot } => commands::diagnose(&cfg, &snapshot),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
