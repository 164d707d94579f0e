mod commands;
mod output;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use goldenshift::dynamics::DynamicsError;
use goldenshift::entropy::{EntropyError, MeasureKind};
use goldenshift::goldfield::FieldError;
use goldenshift::graph::GraphError;
use goldenshift::measures::MeasureError;
use goldenshift::torus::TorusError;
use goldenshift::words::WordError;

use output::{Format, Renderer};

pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("{0}")]
    Usage(String),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            Self::Field(_) => "FieldError",
            Self::Word(_) => "WordError",
            Self::Graph(_) => "GraphError",
            Self::Measure(_) => "MeasureError",
            Self::Entropy(_) => "EntropyError",
            Self::Dynamics(_) => "DynamicsError",
            Self::Torus(_) => "TorusError",
            Self::Usage(_) => "UsageError",
            Self::Io(_) => "IoError",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "goldenshift", version, about = "Golden-mean expansions, Erdős measure and the goldenshift")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads for parallel kernels
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Directory for level-table caches
    #[arg(long, global = true, env = "GOLDENSHIFT_CACHE")]
    cache_dir: Option<PathBuf>,
    /// Decimal places for floating output (at least 15; f64 values carry at most 17)
    #[arg(long, global = true, default_value_t = 30, value_parser = clap::value_parser!(u32).range(15..))]
    precision: u32,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Quantity {
    #[value(name = "h-mu")]
    HMu,
    #[value(name = "h-mu-s")]
    HMuS,
    #[value(name = "h-m-s")]
    HMS,
    #[value(name = "e-mu")]
    EMu,
    #[value(name = "e-m")]
    EM,
    /// level entropy H^(n)/n at n = --terms
    Level,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Self::HMu => "h-mu",
            Self::HMuS => "h-mu-s",
            Self::HMS => "h-m-s",
            Self::EMu => "e-mu",
            Self::EM => "e-m",
            Self::Level => "level",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Greedy expansion of x in base λ
    Expand {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 40)]
        digits: usize,
        /// Finite two-sided normal form of x ∈ Z[λ]
        #[arg(long)]
        two_sided: bool,
    },
    /// Normal, lazy or maximal form of a 0-1 word
    Normalize {
        word: String,
        #[arg(long, conflicts_with = "max")]
        lazy: bool,
        #[arg(long)]
        max: bool,
    },
    /// Block decomposition of a word, or all blocks of a given class
    Blocks {
        #[arg(required_unless_present = "enumerate")]
        word: Option<String>,
        #[arg(long, value_name = "N")]
        enumerate: Option<u32>,
    },
    /// Number of words of the same length and value
    Cardinality { word: String },
    /// Exact μ (or ν) of [lo, hi) or of a cylinder
    Measure {
        #[arg(long)]
        nu: bool,
        #[arg(long, value_name = "WORD", conflicts_with_all = ["lo", "hi"])]
        cylinder: Option<String>,
        #[arg(allow_hyphen_values = true, required_unless_present = "cylinder")]
        lo: Option<String>,
        #[arg(allow_hyphen_values = true, required_unless_present = "cylinder")]
        hi: Option<String>,
    },
    /// Entropy series and constants
    Entropy {
        #[arg(value_enum)]
        quantity: Quantity,
        #[arg(long)]
        terms: Option<u32>,
    },
    /// K_n and L_n from the Euclidean tree
    Knseries {
        #[arg(long, default_value_t = 20)]
        max: u32,
    },
    /// Monte Carlo block statistics, or the local dimension with --digits
    Simulate {
        #[arg(long, default_value = "erdos")]
        measure: MeasureKind,
        #[arg(long, default_value_t = 1_000_000)]
        blocks: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Same as --format json
        #[arg(long)]
        json: bool,
        #[arg(long)]
        digits: Option<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Include the per-block histogram
        #[arg(long)]
        histogram: bool,
    },
    /// Walk the adic order from a finite path head
    Adic {
        head: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long)]
        backward: bool,
    },
    /// Torus images of a finite two-sided word
    Torus {
        #[arg(allow_hyphen_values = true)]
        word: String,
        /// Show the five-point fiber with kernel elements truncated to T periods
        #[arg(long, value_name = "T")]
        kernel: Option<u32>,
    },
    /// Reference constants with pass/fail
    Report {
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        blocks: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads.max(1))
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut format = cli.global.format;
    let out = match cli.command {
        Command::Expand { x, digits, two_sided } => commands::expand(&x, digits, two_sided)?,
        Command::Normalize { word, lazy, max } => commands::normalize(&word, lazy, max)?,
        Command::Blocks { word, enumerate } => commands::blocks(word.as_deref(), enumerate)?,
        Command::Cardinality { word } => commands::cardinality(&word)?,
        Command::Measure { nu, cylinder, lo, hi } => {
            commands::measure(nu, cylinder.as_deref(), lo.as_deref(), hi.as_deref())?
        }
        Command::Entropy { quantity, terms } => commands::entropy(quantity, terms, cli.global.cache_dir.as_deref())?,
        Command::Knseries { max } => commands::knseries(max)?,
        Command::Simulate { measure, blocks, seed, json, digits, samples, histogram } => {
            if json {
                format = Format::Json;
            }
            match digits {
                Some(d) => commands::dimension(seed, d, samples)?,
                None => commands::simulate(measure, seed, blocks, histogram)?,
            }
        }
        Command::Adic { head, steps, backward } => commands::adic(&head, steps, backward)?,
        Command::Torus { word, kernel } => commands::torus(&word, kernel)?,
        Command::Report { json, seed, blocks } => {
            if json {
                format = Format::Json;
            }
            commands::Output::records(report::report(seed, blocks)?)
        }
    };
    let renderer = Renderer { format, precision: cli.global.precision as usize };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    out.render(&renderer, &mut lock)?;
    lock.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code())
        }
    }
}
