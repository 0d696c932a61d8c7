//! Experiments: training on fixed splits, cross-validation, metrics and reports.

pub mod compare;
pub mod cv;
pub mod metrics;
pub mod report;
pub mod train;

pub use compare::{compare, Comparison, Hypothesis, PairDelta};
pub use cv::{cross_validate, stratified_holdout, INNER_VALIDATION_FRACTION};
pub use metrics::{f1_score, metrics, ClassMetrics, ConfusionMatrix, Metrics};
pub use report::{
    ids_hash, manifest_hash, read_json, sha256_hex, summarize, write_json, write_loss_series,
    CVReport, LossHistory, MetricSummary, MetricsReport,
};
pub use train::{
    derive_seed, fit_network, restrict_table, train_eval, ModelBody, TrainConfig, TrainOutcome,
    TrainedModel, THRESHOLD,
};
