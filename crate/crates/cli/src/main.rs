//! `scripta`: generate letter corpora, train the three recognizers, evaluate
//! them and recognize single scanned characters.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scripta_core::imaging::ThresholdPolicy;
use scripta_core::models::ModelKind;

#[derive(Debug, Parser)]
#[command(
    name = "scripta",
    version,
    about = "Handwritten letter extraction and neural recognition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic A-Z corpus.
    GenData(GenDataArgs),
    /// Train a model on the leading rows of a corpus.
    Train(TrainArgs),
    /// Score a trained model on a corpus.
    Evaluate(EvaluateArgs),
    /// Extract one character from a PGM image and classify it.
    Recognize(RecognizeArgs),
    /// Draw a letter template or a whole corpus sheet as PGM.
    Render(RenderArgs),
    /// Cut a scanned sheet into cells and write the extracted corpus.
    Ingest(IngestArgs),
}

#[derive(Debug, Args)]
struct GenDataArgs {
    /// Sheet rows; each row holds A-Z once.
    #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u64).range(1..))]
    rows: u64,
    /// Per-pixel flip probability.
    #[arg(long, default_value_t = 0.0)]
    flip: f64,
    /// Maximum translation in pixels.
    #[arg(long, default_value_t = 0)]
    jitter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Direct,
    Correlation,
    Hierarchical,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Direct => ModelKind::Direct,
            KindArg::Correlation => ModelKind::Correlation,
            KindArg::Hierarchical => ModelKind::Hierarchical,
        }
    }
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long, default_value_t = 10)]
    train_rows: usize,
    #[arg(long, default_value_t = 5)]
    test_rows: usize,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum)]
    model: KindArg,
    /// Bundle directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long, default_value_t = 0.2)]
    eta: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.001)]
    mse_threshold: f64,
    #[arg(long, default_value_t = 50_000)]
    max_epochs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    hidden: usize,
    /// Initial weights are uniform in [-r, r].
    #[arg(long, default_value_t = 0.5)]
    init_range: f64,
    /// Present samples in file order every epoch.
    #[arg(long)]
    no_shuffle: bool,
    /// Letter groups for the hierarchical model, one group per line.
    #[arg(long)]
    grouping: Option<PathBuf>,
    /// Exit 1 if any network misses the MSE threshold.
    #[arg(long)]
    require_converged: bool,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitChoice {
    Train,
    Test,
    All,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Bundle directory written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitChoice::All)]
    split: SplitChoice,
    #[command(flatten)]
    rows: SplitArgs,
    /// Write per-letter accuracy and the confusion matrix as CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CellArgs {
    /// Crop origin and size; the whole image when omitted.
    #[arg(long, default_value_t = 0)]
    x: usize,
    #[arg(long, default_value_t = 0)]
    y: usize,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
}

#[derive(Debug, Args)]
struct RecognizeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[command(flatten)]
    cell: CellArgs,
    /// Gray level below which a pixel is ink, or `otsu`.
    #[arg(long, default_value = "128", value_parser = parse_threshold)]
    threshold: ThresholdPolicy,
    /// Treat light pixels as ink.
    #[arg(long)]
    invert: bool,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Render this letter's template.
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    letter: Option<char>,
    /// Render every sample of this corpus into a sheet.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 27)]
    cell_width: usize,
    #[arg(long, default_value_t = 32)]
    cell_height: usize,
    /// Write P2 text instead of binary P5.
    #[arg(long)]
    ascii: bool,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    rows: u64,
    #[arg(long, default_value_t = 27)]
    cell_width: usize,
    #[arg(long, default_value_t = 32)]
    cell_height: usize,
    #[arg(long, default_value = "128", value_parser = parse_threshold)]
    threshold: ThresholdPolicy,
    #[arg(long)]
    invert: bool,
    #[arg(short, long)]
    out: PathBuf,
}

fn parse_threshold(s: &str) -> Result<ThresholdPolicy, String> {
    s.parse().map_err(|e| format!("{e}"))
}

/// Error tagged with the exit code it maps to.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SCRIPTA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        usage(anyhow::anyhow!(
            "SCRIPTA_THREADS must be a count, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(runtime)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::GenData(a) => commands::gen_data(a),
        Command::Train(a) => commands::train(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Recognize(a) => commands::recognize(a),
        Command::Render(a) => commands::render(a),
        Command::Ingest(a) => commands::ingest(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
