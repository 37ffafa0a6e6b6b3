mod commands;
mod topology;
mod verify;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heapsync::text::{parse_config, RunConfig};
use heapsync::Error;

#[derive(Parser)]
#[command(name = "heapsync")]
#[command(about = "Analyze synchronization networks and generate random traces")]
#[command(version)]
struct Cli {
    /// Configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed, overrides [run] seed
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Number of samples or runs
    #[arg(long, global = true, value_name = "N")]
    samples: Option<u64>,

    /// Output budget in pieces (work budget for oracle), overrides [run] budget
    #[arg(long, global = true, value_name = "N")]
    budget: Option<usize>,

    /// Builtin verification scenario
    #[arg(long, global = true, value_name = "NAME")]
    scenario: Option<String>,

    /// Write the main output here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the monoid, its Möbius polynomial and the finite/infinite criterion
    Analyze,
    /// Compute local distributions realizing the [targets] valuation
    Solve,
    /// Run the configured generator and write traces
    Generate {
        /// Write the increment log of a full synchronization walk
        #[arg(long)]
        increments: bool,
    },
    /// Run a builtin statistical scenario and report pass/fail per check
    Verify {
        /// List the builtin scenarios
        #[arg(long)]
        list: bool,
    },
    /// Cross-check enumeration, transforms and solvers by brute force
    Oracle {
        /// Longest trace length enumerated
        #[arg(long, value_name = "N", default_value_t = 6)]
        horizon: usize,
    },
}

/// Outcome of a subcommand other than success.
#[derive(Debug)]
pub enum Failure {
    /// Checks ran and at least one failed.
    Fail(String),
    Usage(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Input(_) => Failure::Usage(e.to_string()),
            Error::Resource(_) => Failure::Resource(e.to_string()),
            _ => Failure::Fail(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

/// Global flags after merging with the config's [run] section.
pub struct Options {
    pub seed: u64,
    pub samples: Option<u64>,
    pub budget: Option<usize>,
    /// `--budget` alone, used as a work budget by analyze and oracle.
    pub work_budget: Option<u64>,
    pub scenario: Option<String>,
    pub out: Option<PathBuf>,
}

pub fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Failure::Usage(format!("{}:{line}: {msg}", path.display())),
        other => Failure::from(other),
    })
}

/// Writes `text` to `--out` or stdout.
pub fn emit(out: &Option<PathBuf>, text: &str) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

fn run(cli: Cli) -> CmdResult {
    let config = match &cli.config {
        Some(p) => Some(load_config(p)?),
        None => None,
    };
    let from_run = |f: fn(&RunConfig) -> Option<u64>| config.as_ref().and_then(f);
    let opts = Options {
        seed: cli.seed.or(from_run(|c| c.run.seed)).unwrap_or(0),
        samples: cli.samples.or(from_run(|c| c.run.samples)),
        budget: cli.budget.or(config.as_ref().and_then(|c| c.run.budget)),
        work_budget: cli.budget.map(|b| b as u64),
        scenario: cli.scenario.or(config.as_ref().and_then(|c| c.run.scenario.clone())),
        out: cli.out,
    };
    let need = |c: Option<RunConfig>| c.ok_or_else(|| Failure::Usage("--config is required".into()));
    match cli.command {
        Command::Analyze => commands::analyze(&need(config)?, &opts),
        Command::Solve => commands::solve(&need(config)?, &opts),
        Command::Generate { increments } => commands::generate(&need(config)?, &opts, increments),
        Command::Verify { list: true } => {
            for (name, about) in verify::SCENARIOS {
                println!("{name:<22} {about}");
            }
            Ok(())
        }
        Command::Verify { list: false } => verify::verify(config, &opts),
        Command::Oracle { horizon } => commands::oracle(&need(config)?, &opts, horizon),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Fail(msg)) => {
            eprintln!("heapsync: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("heapsync: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("heapsync: {msg}");
            ExitCode::from(3)
        }
    }
}
