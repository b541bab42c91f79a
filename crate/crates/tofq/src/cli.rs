use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{self, Command};
use crate::config::{EngineName, ScenarioConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "tofq", version, about = "Qubit-pointer time-of-flight momentum measurement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    /// Scenario file (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `shots.seed` and `budget.base_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub engine: Option<EngineFlag>,
    /// Worker threads for λ and seed sweeps.
    #[arg(long, global = true, env = "TOFQ_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Correlations ⟨σˣˣ(T)⟩ and ⟨σʸʸ(T)⟩ along the λ grid or a t2 sweep.
    Correlate,
    /// Momentum density from sampled characteristic-function values.
    Reconstruct {
        /// Invert samples from this CSV instead of computing them.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Pass/fail table of all cross-module invariants.
    OracleCheck,
    /// Separable versus entangled reconstruction error at equal shot budget.
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineFlag {
    Analytic,
    Oracle,
}

/// Loads the config and applies command-line overrides.
pub fn effective_config(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        if let Some(s) = cfg.shots.as_mut() {
            s.seed = seed;
        }
        if let Some(b) = cfg.budget.as_mut() {
            b.base_seed = seed;
        }
    }
    if let Some(e) = cli.engine {
        cfg.measurement.engine = match e {
            EngineFlag::Analytic => EngineName::Analytic,
            EngineFlag::Oracle => EngineName::Oracle,
        };
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = effective_config(cli)?;
    let (command, samples) = match &cli.command {
        Sub::Correlate => (Command::Correlate, None),
        Sub::Reconstruct { samples } => (Command::Reconstruct, samples.as_deref()),
        Sub::OracleCheck => (Command::OracleCheck, None),
        Sub::Budget => (Command::Budget, None),
    };
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be positive".into())),
        Some(n) => n,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| commands::execute(command, &cfg, samples))
}

/// Parses `args`, runs, and returns the process exit code. Failures print a
/// JSON line to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            let err = CliError::Config(first.to_string());
            eprintln!("{}", err.json_line());
            return err.exit_code();
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.json_line());
            e.exit_code()
        }
    }
}
