use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fakenews_core::corpus::{LabelSpace, Variant};
use fakenews_core::models::ModelKind;

#[derive(Debug, Parser)]
#[command(
    name = "fakenews",
    version,
    about = "Fake-news classification on LIAR / LIAR-Plus"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate TSV data, write normalized files and a split manifest.
    Prepare(PrepareArgs),
    /// Train on fixed splits and report test metrics.
    Train(TrainArgs),
    /// Stratified k-fold cross-validation over train and validation data.
    Cv(CvArgs),
    /// Score a checkpoint on labelled data.
    Evaluate(EvaluateArgs),
    /// Label a TSV of statements with a checkpoint.
    Predict(PredictArgs),
    /// Compare reports evaluated on the same test split.
    Compare(CompareArgs),
    /// Print the history ratio and credit score for a speaker's counts.
    ScoreSpeaker(ScoreArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Directory with train / validation / test files, or a single TSV file.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "liar-plus")]
    pub variant: Variant,
    /// Split manifest (JSON of record ids) to use instead of the files' own split.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Validation fraction when `--data` is a single file without a manifest.
    #[arg(long, default_value_t = 0.1)]
    pub validation_frac: f64,
    /// Test fraction when `--data` is a single file without a manifest.
    #[arg(long, default_value_t = 0.1)]
    pub test_frac: f64,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Model fields; any flag given overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelFlags {
    #[arg(long, alias = "model")]
    pub kind: Option<ModelKind>,
    #[arg(long, alias = "labels")]
    pub label_space: Option<LabelSpace>,
    #[arg(long)]
    pub statement_width: Option<usize>,
    #[arg(long)]
    pub metadata_width: Option<usize>,
    #[arg(long)]
    pub justification_width: Option<usize>,
    #[arg(long)]
    pub credit_width: Option<usize>,
    #[arg(long)]
    pub lstm_hidden: Option<usize>,
    #[arg(long)]
    pub statement_dropout: Option<f64>,
    #[arg(long)]
    pub justification_dropout: Option<f64>,
    #[arg(long)]
    pub statement_max_len: Option<usize>,
    #[arg(long)]
    pub justification_max_len: Option<usize>,
    #[arg(long)]
    pub shared_encoder: Option<bool>,
    #[arg(long)]
    pub metadata_embedding_dim: Option<usize>,
    #[arg(long)]
    pub embedding_dim: Option<usize>,
    #[arg(long)]
    pub trainable_embeddings: Option<bool>,
    #[arg(long)]
    pub l2: Option<f64>,
}

/// Training fields; any flag given overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eval_batch_size: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML file with `[model]` and `[train]` tables.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub data: DataArgs,
    /// Word vectors in GloVe text format.
    #[arg(long)]
    pub embeddings: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub exp: ExperimentArgs,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub exp: ExperimentArgs,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Labelled TSV file, or a directory whose test file is used.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "liar-plus")]
    pub variant: Variant,
    #[arg(long, default_value_t = 1024)]
    pub batch_size: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// TSV in the training layout; the label column may be empty.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "liar-plus")]
    pub variant: Variant,
    #[arg(long, default_value_t = 1024)]
    pub batch_size: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Report files, optionally named as `NAME=PATH`.
    #[arg(long = "report", required = true)]
    pub reports: Vec<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, default_value_t = 0.0)]
    pub btc: f64,
    #[arg(long, default_value_t = 0.0)]
    pub fc: f64,
    #[arg(long, default_value_t = 0.0)]
    pub htc: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mtc: f64,
    #[arg(long, default_value_t = 0.0)]
    pub pfc: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub w: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Take `w` and `b` from a trained enhanced model instead.
    #[arg(long, conflicts_with_all = ["w", "b"])]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}
