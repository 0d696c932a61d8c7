//! Report types and their on-disk forms.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metrics::{ConfusionMatrix, Metrics};
use crate::corpus::{LabelSpace, SplitManifest};
use crate::error::{Error, Result};
use crate::models::ModelKind;

/// Per-epoch mean losses. Empty for closed-form baselines.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossHistory {
    pub train: Vec<f64>,
    pub validation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: ModelKind,
    pub label_space: LabelSpace,
    pub config_hash: String,
    pub seed: u64,
    /// SHA-256 of the split manifest JSON.
    pub split_manifest: String,
    /// SHA-256 of the newline-joined test ids, for comparing reports.
    pub test_split_hash: String,
    /// Binary decision rule: predict fake when P(fake) is at least this.
    pub threshold: f64,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    #[serde(flatten)]
    pub test: Metrics,
    pub train_metrics: Metrics,
    pub loss_history: LossHistory,
    /// 1-based epoch whose weights were kept; `None` for closed-form baselines.
    pub best_epoch: Option<usize>,
    /// Train, validation and test partition sizes.
    #[serde(default)]
    pub partition_sizes: [usize; 3],
    /// Data-handling choices that affect comparability with other runs.
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Fold-level aggregate of the headline metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

impl MetricSummary {
    fn from_metrics(m: &Metrics) -> Self {
        MetricSummary {
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            macro_precision: m.macro_precision,
            macro_recall: m.macro_recall,
            macro_f1: m.macro_f1,
        }
    }

    fn to_array(self) -> [f64; 7] {
        [
            self.accuracy,
            self.precision,
            self.recall,
            self.f1,
            self.macro_precision,
            self.macro_recall,
            self.macro_f1,
        ]
    }

    fn from_array(a: [f64; 7]) -> Self {
        MetricSummary {
            accuracy: a[0],
            precision: a[1],
            recall: a[2],
            f1: a[3],
            macro_precision: a[4],
            macro_recall: a[5],
            macro_f1: a[6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub model: ModelKind,
    pub label_space: LabelSpace,
    pub config_hash: String,
    pub seed: u64,
    pub k: usize,
    pub folds: Vec<MetricsReport>,
    pub mean: MetricSummary,
    /// Population variance (divides by the number of folds).
    pub variance: MetricSummary,
    pub variance_kind: String,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Mean and population variance of each headline metric over `folds`.
pub fn summarize(folds: &[MetricsReport]) -> Result<(MetricSummary, MetricSummary)> {
    if folds.is_empty() {
        return Err(Error::EmptyInput("no fold reports"));
    }
    let k = folds.len() as f64;
    let rows: Vec<[f64; 7]> = folds
        .iter()
        .map(|r| MetricSummary::from_metrics(&r.test).to_array())
        .collect();
    let mut mean = [0.0; 7];
    for r in &rows {
        for j in 0..7 {
            mean[j] += r[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= k);
    let mut var = [0.0; 7];
    for r in &rows {
        for j in 0..7 {
            var[j] += (r[j] - mean[j]).powi(2);
        }
    }
    var.iter_mut().for_each(|v| *v /= k);
    Ok((
        MetricSummary::from_array(mean),
        MetricSummary::from_array(var),
    ))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn manifest_hash(m: &SplitManifest) -> String {
    sha256_hex(&serde_json::to_vec(m).expect("manifest serializes"))
}

pub fn ids_hash(ids: &[String]) -> String {
    sha256_hex(ids.join("\n").as_bytes())
}

/// Writes any report as pretty JSON.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Two-column `epoch<TAB>loss` series, epochs 1-based.
pub fn write_loss_series(path: impl AsRef<Path>, losses: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (i, l) in losses.iter().enumerate() {
        writeln!(out, "{}\t{l}", i + 1).expect("write to Vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
