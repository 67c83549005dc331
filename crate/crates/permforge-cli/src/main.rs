//! permforge command-line front end.
//!
//! Thin sequential orchestration over the permforge library: each
//! subcommand reads files, calls a couple of library entry points, and
//! writes a machine-readable result. Exit codes are contractual:
//!
//! * 0 — success
//! * 1 — usage error (bad flags, nonexistent input paths)
//! * 2 — data/format error (unparseable or degenerate inputs)
//! * 3 — internal error (I/O failures, panics)

mod commands;

use std::panic::catch_unwind;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub(crate) const EXIT_USAGE: u8 = 1;
pub(crate) const EXIT_DATA: u8 = 2;
pub(crate) const EXIT_INTERNAL: u8 = 3;

/// A subcommand failure carrying its contractual exit code.
pub(crate) struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<permforge::Error> for Failure {
    fn from(e: permforge::Error) -> Failure {
        // Library I/O problems are environmental, everything else means the
        // data itself is bad.
        let code = match &e {
            permforge::Error::Io(_) => EXIT_INTERNAL,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub(crate) type CliResult = Result<(), Failure>;

#[derive(Parser)]
#[command(
    name = "permforge",
    version,
    about = "Android permission mining, feature reduction, and malware-classification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract requested permissions from manifests or APKs into JSONL
    Extract(ExtractArgs),
    /// Build a labeled feature matrix from extracted records
    Vectorize(VectorizeArgs),
    /// Emit frequency, variance, and correlation tables for a matrix
    Analyze(AnalyzeArgs),
    /// Fit a feature reduction and transform a matrix
    Reduce(ReduceArgs),
    /// Train a classifier on a matrix and save the model
    Train(TrainArgs),
    /// Score a matrix with a saved model and report metrics
    Evaluate(EvaluateArgs),
    /// Run the reduction x classifier evaluation grid
    Grid(GridArgs),
    /// Generate a synthetic labeled corpus
    Synth(SynthArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Manifest files, APKs, or directories to scan (directories recurse)
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output JSONL path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VectorizeArgs {
    /// JSONL records produced by `extract`
    records: PathBuf,
    /// Matrix CSV output path
    #[arg(long)]
    out: PathBuf,
    /// Label CSV with header row_id,label; without it labels come from
    /// benign/ and malware/ path components of the row ids
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Permission catalog TSV (default: built-in; PERMFORGE_CATALOG
    /// overrides the default, this flag overrides both)
    #[arg(long)]
    catalog: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Matrix CSV to profile
    matrix: PathBuf,
    /// Output directory for frequency.csv, variance.csv, correlation.csv
    #[arg(long)]
    out: PathBuf,
    /// Seed for the importance forest behind correlation.csv
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct ReduceArgs {
    /// Matrix CSV to reduce
    matrix: PathBuf,
    /// Reduction method: od | vt | pca | ae (ae1l/ae3l also accepted)
    #[arg(long)]
    method: String,
    /// Autoencoder architecture for --method ae: ae1l | ae3l
    #[arg(long)]
    arch: Option<String>,
    /// Variance cutoff for --method vt
    #[arg(long, default_value_t = 0.10)]
    threshold: f64,
    /// Component count for --method pca
    #[arg(long, default_value_t = 16)]
    components: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Transformed matrix output path
    #[arg(long)]
    out: PathBuf,
    /// Also save the fitted reduction model here
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Matrix CSV to train on (all rows)
    matrix: PathBuf,
    /// Classifier: dt | knn | svm | rf | adaboost | dnn
    /// (dnn2l/dnn4l/dnn7l also accepted)
    #[arg(long)]
    classifier: String,
    /// Network architecture for --classifier dnn: dnn2l | dnn4l | dnn7l
    #[arg(long)]
    arch: Option<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Model output path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Matrix CSV to score
    matrix: PathBuf,
    /// Saved classifier model
    #[arg(long)]
    model: PathBuf,
    /// Saved reduction model applied before scoring
    #[arg(long)]
    reduction: Option<PathBuf>,
    /// Metrics CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Matrix CSV to evaluate
    matrix: PathBuf,
    /// Grid configuration TOML (keys: reductions, classifiers, ratio,
    /// seed, timing_runs, vt_threshold, pca_components)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a human-readable summary table to stdout
    #[arg(long)]
    summary: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Train fraction of the split
    #[arg(long)]
    ratio: Option<f64>,
    /// Timed fits per cell (the median is reported)
    #[arg(long)]
    timing_runs: Option<usize>,
    /// Variance cutoff for the VT reduction
    #[arg(long)]
    threshold: Option<f64>,
    /// Component count for the PCA reduction
    #[arg(long)]
    components: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Rows generated per class
    #[arg(long, default_value_t = 1000)]
    n_per_class: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Matrix CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Permission catalog TSV (default: built-in; PERMFORGE_CATALOG
    /// overrides the default, this flag overrides both)
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Profile override CSV with header permission,p_benign,p_malware,
    /// applied over the default class-probability profile
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Write the effective class-probability profile instead of rows
    #[arg(long)]
    dump_profile: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version arrive here too; only real usage
            // errors take the failure exit code.
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match catch_unwind(move || dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(failure)) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
        Err(_) => {
            eprintln!("error: internal failure (panic)");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Extract(args) => commands::extract(args),
        Command::Vectorize(args) => commands::vectorize(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Reduce(args) => commands::reduce(args),
        Command::Train(args) => commands::train(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Grid(args) => commands::grid(args),
        Command::Synth(args) => commands::synth(args),
    }
}
