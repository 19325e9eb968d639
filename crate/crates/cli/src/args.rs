use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "tcomqa",
    version,
    about = "Build and score temporal commonsense QA datasets"
)]
pub struct Cli {
    /// Log effective configuration and progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate, validate and answer questions over a corpus.
    Extract(ExtractArgs),
    /// Run the validators over (context, question) pairs.
    Validate(ValidateArgs),
    /// Semantic acceptance rate at several thresholds.
    Sweep(SweepArgs),
    /// Aggregate crowd votes, score a validator, or compare answers to gold.
    Evaluate(EvaluateArgs),
    /// Per-property DE/SS table from judged rows.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Plain,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Mock,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ValidatorArg {
    Lexical,
    Semantic,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FailPolicyArg {
    Skip,
    Abort,
}

/// Validator flags shared by `extract` and `validate`.
#[derive(Debug, Args)]
pub struct ValidatorOpts {
    #[arg(long, value_enum, default_value = "lexical")]
    pub validator: ValidatorArg,
    /// Semantic similarity threshold in [0, 1].
    #[arg(long, default_value_t = tcomqa_core::DEFAULT_THETA)]
    pub theta: f64,
    /// Marker lexicon, one phrase per line. Defaults to the bundled list.
    #[arg(long, env = "TCOM_MARKERS")]
    pub markers: Option<PathBuf>,
    /// Word vectors (text format). Required for semantic validation.
    #[arg(long, env = "TCOM_VECTORS")]
    pub vectors: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "plain")]
    pub format: FormatArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "mock")]
    pub backend: BackendArg,
    /// Model server base URL for the http backend.
    #[arg(long, env = "TCOM_ENDPOINT")]
    pub endpoint: Option<String>,
    #[command(flatten)]
    pub validation: ValidatorOpts,
    /// Comma-separated subset, e.g. "duration,typical time".
    #[arg(long, value_delimiter = ',')]
    pub properties: Vec<String>,
    /// Also write rejected questions next to the output.
    #[arg(long)]
    pub keep_rejects: bool,
    #[arg(long, value_enum, default_value = "skip")]
    pub fail_policy: FailPolicyArg,
    /// Mock backend answer variety; 0 gives the fixed answers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub max_parallel: usize,
    #[arg(long, default_value_t = 3)]
    pub max_retries: u32,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 30.0)]
    pub timeout: f64,
    /// RFC 3339 timestamp stamped on records. Defaults to the Unix epoch
    /// for the mock backend and the current time otherwise.
    #[arg(long)]
    pub created_at: Option<String>,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
    /// Print the run report as JSON on stdout.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// JSON lines with "context" and "question" (optional "id").
    #[arg(long)]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub validation: ValidatorOpts,
    /// Write verdicts here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, env = "TCOM_VECTORS")]
    pub vectors: PathBuf,
    #[arg(long, env = "TCOM_MARKERS")]
    pub markers: Option<PathBuf>,
    /// Thresholds; sorted ascending before the sweep.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.7")]
    pub thetas: Vec<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).multiple(false)))]
pub struct EvaluateArgs {
    /// Crowd votes: {"item_id", "judge_id", "label"} per line.
    #[arg(long, group = "mode")]
    pub votes: Option<PathBuf>,
    /// Validator predictions with gold: {"item_id", "prediction", "gold"}.
    #[arg(long, group = "mode")]
    pub labeled: Option<PathBuf>,
    /// Generated answers, scored against --gold.
    #[arg(long, group = "mode", requires_all = ["gold", "vectors"])]
    pub answers: Option<PathBuf>,
    /// Gold answers, same line format as --answers.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long, env = "TCOM_VECTORS")]
    pub vectors: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON lines with "property" and optional "de_correct" / "ss".
    #[arg(long)]
    pub rows: PathBuf,
    #[arg(long)]
    pub json: bool,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}
