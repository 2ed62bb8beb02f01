//! Command-line experiments over `regev-core`.
//!
//! Every command is seeded, runs its trials on one substream per trial, and
//! writes `report.json` and `trials.csv` to the output directory.

pub mod commands;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regev_core::pipelines::ParamOverrides;
use regev_core::Error;
use serde::{Deserialize, Serialize};

pub use report::{ExperimentReport, Summary};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "REGEV_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RETRYABLE: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "regev", version, about = "Relation-lattice factoring and discrete-log experiments")]
pub struct Cli {
    #[command(flatten)]
    pub config: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct GlobalArgs {
    /// Root seed; every trial draws from a substream of it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for report.json and trials.csv.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "regev-out")]
    pub out_dir: PathBuf,
    /// What to print on stdout: the summary as JSON, or the trial rows as CSV.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Largest modulus accepted.
    #[arg(long, global = true, default_value_t = 1_000_000_000_000)]
    pub modulus_budget: u64,
}

/// Default prime bound for the pipeline commands.
pub const DEFAULT_X: &str = "10000";

/// Overrides of the formula parameters `d`, `X`, draws, retries and `H`.
#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct ParamArgs {
    #[arg(long)]
    pub d: Option<u32>,
    /// Prime bound `X`, or `formula` for `d^{1000 d}`. The default is scaled
    /// because `d^4` draws at that bound almost never contain `d`
    /// primes when `d` is small.
    #[arg(long = "x", default_value = DEFAULT_X)]
    pub x: String,
    #[arg(long)]
    pub k_draws: Option<u64>,
    #[arg(long)]
    pub retries: Option<u32>,
}

impl ParamArgs {
    pub fn overrides(&self, h_cap: Option<u64>) -> ParamOverrides {
        ParamOverrides {
            d: self.d,
            x: (self.x != "formula").then(|| self.x.clone()),
            h_cap,
            k_draws: self.k_draws,
            retries: self.retries,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    /// Find a nontrivial divisor of an odd composite.
    Factor {
        #[arg(long)]
        modulus: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Solve base^x = target (mod N).
    Dlog {
        #[arg(long)]
        modulus: u64,
        #[arg(long)]
        base: u64,
        #[arg(long)]
        target: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Multiplicative order of an element.
    Order {
        #[arg(long)]
        modulus: u64,
        #[arg(long)]
        element: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// LLL-reduced relation lattices of d sampled primes and r sampled units.
    ShortBasis {
        #[arg(long)]
        modulus: u64,
        #[arg(long, default_value_t = 0)]
        r: usize,
        #[arg(long, default_value_t = 20)]
        trials: u64,
        /// Box radius for the spanning check.
        #[arg(long, default_value_t = 3)]
        span_radius: u64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Count-by-characters and main-term identities on a grid.
    VerifyIdentities {
        #[arg(long, default_value_t = 105)]
        max_modulus: u64,
        /// Moduli to test (default: 9,15,21,33,35,45,105 up to the maximum).
        #[arg(long, value_delimiter = ',')]
        moduli: Option<Vec<u64>>,
        /// Random generator tuples per grid point.
        #[arg(long, default_value_t = 3)]
        tuples: u64,
    },
    /// E_j histogram, prime averages and a second moment.
    CharDiagnostics {
        #[arg(long)]
        modulus: u64,
        /// Prime bound for the averages.
        #[arg(long = "x", default_value_t = 10_000)]
        x: u64,
        #[arg(long, default_value_t = 4)]
        h: u64,
        /// Restrict the histogram to M-th power characters.
        #[arg(long)]
        filter: Option<u128>,
        /// Monte Carlo trials for the second moment (0 to skip).
        #[arg(long, default_value_t = 0)]
        moment_trials: u64,
        #[arg(long, default_value_t = 2)]
        moment_d: usize,
    },
    /// Unit cubes meeting random rational hyperplanes.
    CubeLemma {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        #[arg(long = "l", value_delimiter = ',', default_value = "1,2,4,8")]
        ls: Vec<u64>,
        #[arg(long, default_value_t = 1000)]
        normals: u64,
    },
    /// Product-tree multi-exponentiation against the sequential fold.
    BenchMulexp {
        #[arg(long = "d", value_delimiter = ',', default_value = "16,32,64,128,256")]
        ds: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "512,1024")]
        bits: Vec<u64>,
        #[arg(long, default_value_t = 3)]
        instances: u64,
    },
    /// Short products b_0 prod b_i^{h_i} = x modulo a product of safe primes.
    ToyRsa {
        #[arg(long, default_value_t = 1081)]
        modulus: u64,
        /// Fixed target; sampled per trial when absent.
        #[arg(long)]
        target: Option<u64>,
        #[arg(long)]
        h: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[command(flatten)]
        params: ParamArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Factor { .. } => "factor",
            Command::Dlog { .. } => "dlog",
            Command::Order { .. } => "order",
            Command::ShortBasis { .. } => "short-basis",
            Command::VerifyIdentities { .. } => "verify-identities",
            Command::CharDiagnostics { .. } => "char-diagnostics",
            Command::CubeLemma { .. } => "cube-lemma",
            Command::BenchMulexp { .. } => "bench-mulexp",
            Command::ToyRsa { .. } => "toy-rsa",
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub format: Format,
    pub modulus_budget: u64,
    pub command: Command,
}

/// A command's rows, its summary details, and the exit status it implies.
pub struct CommandOutput {
    pub rows: Vec<report::Row>,
    pub per_trial_ms: Vec<f64>,
    pub details: serde_json::Value,
    pub exit: i32,
}

#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => EXIT_INVALID,
            RunError::Core(Error::Input(_)) => EXIT_INVALID,
            RunError::Core(Error::Resource { .. }) => EXIT_RESOURCE,
            RunError::Core(Error::Internal(_)) | RunError::Io(_) => EXIT_FAILED_CHECK,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "{m}"),
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Core(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Runs a parsed invocation, writes its report, and returns it with the
/// exit status.
pub fn run(cli: Cli) -> Result<(ExperimentReport, i32), RunError> {
    let seed = cli
        .config
        .seed
        .ok_or_else(|| RunError::Usage(format!("--seed is required for `{}`", cli.command.name())))?;
    let config = ExperimentConfig {
        seed,
        threads: cli.config.threads,
        format: cli.config.format,
        modulus_budget: cli.config.modulus_budget,
        command: cli.command,
    };
    let start = Instant::now();
    let output = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Usage(format!("cannot start {n} threads: {e}")))?
            .install(|| commands::execute(&config)),
        None => commands::execute(&config),
    }?;
    let report = ExperimentReport {
        schema_version: report::SCHEMA_VERSION,
        summary: Summary::from_rows(&output.rows, output.details),
        rows: output.rows,
        timings: report::Timings {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
            per_trial_ms: output.per_trial_ms,
        },
        config,
    };
    report.write(&cli.config.out_dir)?;
    Ok((report, output.exit))
}
