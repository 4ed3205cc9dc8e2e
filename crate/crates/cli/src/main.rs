//! `contfood`: corpus preparation, training, evaluation, model comparison
//! and continual updates from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

mod commands;
mod manifest;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use contfood_core::corpus::Format;

#[derive(Parser, Debug)]
#[command(
    name = "contfood",
    version,
    about = "Continual dish-name classification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded synthetic corpus.
    Gen(GenArgs),
    /// Read and validate a CSV/JSONL corpus, then rewrite it normalized.
    Ingest(IngestArgs),
    /// Label unlabeled records by keyword rules (non-veg cues win).
    Autolabel(AutolabelArgs),
    /// Drop records whose normalized name repeats an earlier one.
    Dedupe(DedupeArgs),
    /// Seeded train/test split.
    Split(SplitArgs),
    /// Train the network; writes a checkpoint, per-epoch history and a replay buffer.
    Train(TrainArgs),
    /// Score a checkpoint on a test corpus, or compare two labeled files.
    Eval(EvalArgs),
    /// Train and score all five models over repeated runs.
    Compare(CompareArgs),
    /// Apply a batch of newly labeled dishes to a checkpoint.
    Increment(IncrementArgs),
    /// Score names for novelty.
    Detect(DetectArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
    /// Render JSON artifacts as plain `key: value` text.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Number of records.
    #[arg(long, default_value_t = 25192)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "corpus.csv")]
    out: PathBuf,
    /// Output format [default: from the file extension].
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Keyword rules JSON [default: built-in lists].
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Generator profile JSON [default: built-in profile].
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Keep the generator's labels instead of writing unlabeled names.
    #[arg(long)]
    labeled: bool,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    /// Input format [default: from the file extension].
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, default_value = "corpus.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AutolabelArgs {
    #[arg(long, default_value = "corpus.csv")]
    input: PathBuf,
    #[arg(long, default_value = "labeled.csv")]
    out: PathBuf,
    /// Keyword rules JSON [default: built-in lists].
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DedupeArgs {
    #[arg(long, default_value = "labeled.csv")]
    input: PathBuf,
    #[arg(long, default_value = "deduped.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long, default_value = "labeled.csv")]
    input: PathBuf,
    /// Train share, in (0, 1).
    #[arg(long, default_value_t = 0.8, value_parser = parse_ratio)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "train.csv")]
    train_out: PathBuf,
    #[arg(long, default_value = "test.csv")]
    test_out: PathBuf,
}

/// Pipeline settings: a JSON config file, then individual overrides.
#[derive(Args, Debug, Default)]
struct PipelineFlags {
    /// Pipeline config JSON; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for SMOTE, initialization, validation split and shuffling [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum epochs [default: 100].
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Mini-batch size [default: 32].
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam learning rate [default: 0.001].
    #[arg(long)]
    learning_rate: Option<f64>,
    /// L2 penalty on the weight matrices [default: 0.01].
    #[arg(long)]
    l2_lambda: Option<f64>,
    /// Early-stopping patience in epochs [default: 5].
    #[arg(long)]
    patience: Option<usize>,
    /// Share of each class held out for validation [default: 0.1].
    #[arg(long)]
    validation_fraction: Option<f64>,
    /// Vocabulary cap and input dimension [default: 5000].
    #[arg(long)]
    max_features: Option<usize>,
    /// Append ingredients to the name before vectorizing.
    #[arg(long)]
    include_ingredients: bool,
    /// Skip SMOTE balancing.
    #[arg(long)]
    no_smote: bool,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long, default_value = "train.csv")]
    train: PathBuf,
    #[command(flatten)]
    pipeline: PipelineFlags,
    #[arg(long, default_value = "model")]
    out_dir: PathBuf,
    /// Search hidden sizes {(64,32), (32,16)} × L2 {0.01, 0.001} and keep the best.
    #[arg(long)]
    grid: bool,
    /// Parallel grid configurations; results do not depend on this.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    /// Replay buffer capacity.
    #[arg(long, default_value_t = 2000)]
    buffer_capacity: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Checkpoint to score (with --test).
    #[arg(long, requires = "test", conflicts_with_all = ["pred", "truth"])]
    checkpoint: Option<PathBuf>,
    /// Labeled test corpus (with --checkpoint).
    #[arg(long, requires = "checkpoint")]
    test: Option<PathBuf>,
    /// Predicted labels as a corpus file (with --truth).
    #[arg(long, requires = "truth")]
    pred: Option<PathBuf>,
    /// True labels as a corpus file (with --pred).
    #[arg(long, requires = "pred")]
    truth: Option<PathBuf>,
    /// L2 weight used in the reported loss.
    #[arg(long, default_value_t = 0.01)]
    l2_lambda: f64,
    #[arg(long, default_value = "metrics.json")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Logreg,
    RandomForest,
    LinearSvm,
    Knn,
    Mlp,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, default_value = "train.csv")]
    train: PathBuf,
    #[arg(long, default_value = "test.csv")]
    test: PathBuf,
    /// Comparison config JSON; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Repeated runs per model [default: 3].
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run r uses a seed derived from (seed, r) [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Models to run [default: all five].
    #[arg(long, value_enum, value_delimiter = ',')]
    models: Vec<ModelArg>,
    /// Parallel model runs; results do not depend on this.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    /// Vocabulary cap and input dimension.
    #[arg(long, default_value_t = 5000)]
    max_features: usize,
    #[arg(long)]
    include_ingredients: bool,
    #[arg(long)]
    no_smote: bool,
    #[arg(long, default_value = "compare")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Replay,
    Naive,
    FullRetrain,
}

#[derive(Args, Debug)]
struct IncrementArgs {
    #[arg(long, default_value = "model/checkpoint.json")]
    checkpoint: PathBuf,
    /// Replay buffer [default: buffer.json next to the checkpoint].
    #[arg(long)]
    buffer: Option<PathBuf>,
    /// JSONL batch of `{item_name, type}` records.
    #[arg(long)]
    batch: PathBuf,
    /// Held-out corpus from the original task, scored before and after.
    #[arg(long)]
    old_test: PathBuf,
    /// Original training corpus; required by full-retrain.
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Replay)]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 0.0001)]
    learning_rate: f64,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Replayed items per new item.
    #[arg(long, default_value_t = 1.0)]
    replay_ratio: f64,
    #[arg(long, default_value_t = 0.01)]
    l2_lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "increment")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(long, default_value = "model/checkpoint.json")]
    checkpoint: PathBuf,
    /// Names to score: a CSV/JSONL corpus, or plain text with one name per line.
    #[arg(long)]
    input: PathBuf,
    /// Confidence margin; names with |p − 0.5| < tau are flagged.
    #[arg(long, default_value_t = 0.15, value_parser = parse_tau)]
    tau: f64,
    /// JSONL output [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, env = "CONTFOOD_ADDR", default_value = contfood_service::DEFAULT_ADDR)]
    addr: std::net::SocketAddr,
    #[arg(long, env = "CONTFOOD_DATA_DIR", default_value = "service-data")]
    data_dir: PathBuf,
    /// Initial checkpoint, copied into the data directory on first start.
    #[arg(long, env = "CONTFOOD_CHECKPOINT")]
    checkpoint: Option<PathBuf>,
    #[arg(long, env = "CONTFOOD_TAU", default_value_t = 0.15, value_parser = parse_tau)]
    tau: f64,
    /// Held-out corpus scored before and after each increment.
    #[arg(long)]
    old_test: Option<PathBuf>,
    /// Static assets (the labeling console) served at `/`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Increment time limit in seconds.
    #[arg(long, default_value_t = 300)]
    increment_timeout: u64,
    /// Epochs per increment.
    #[arg(long, default_value_t = 20)]
    increment_epochs: usize,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// JSON artifacts (metrics, reports, comparisons, manifests).
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Write the text here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_ratio(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

fn parse_tau(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..0.5).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 0.5)"))
    }
}

/// Invalid flag combinations found after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<contfood_core::Error>() {
            return if e.is_numeric() { 3 } else { 2 };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Ingest(a) => commands::ingest(a),
        Command::Autolabel(a) => commands::autolabel(a),
        Command::Dedupe(a) => commands::dedupe(a),
        Command::Split(a) => commands::split(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Compare(a) => commands::compare(a),
        Command::Increment(a) => commands::increment(a),
        Command::Detect(a) => commands::detect(a),
        Command::Serve(a) => commands::serve(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            if code == 1 {
                eprintln!("usage error: {e:#}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(code)
        }
    }
}
