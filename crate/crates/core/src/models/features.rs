//! Record → model input conversion, fitted on a training partition.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use crate::corpus::{impute_record, CreditCounts, ImputeStats, LabelSpace, Record, UNKNOWN};
use crate::error::{Error, Result};
use crate::text::{
    average_length, encode, in_vocab_len, tokenize, EmbeddingTable, EncodedSequence,
};

/// Categorical metadata fields in encoding order.
pub const META_FIELDS: [&str; 6] = ["subject", "speaker", "job", "state", "party", "context"];

/// String → index map with index 0 reserved for [`UNKNOWN`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    fn new() -> Self {
        Vec::new().into()
    }

    fn insert(&mut self, s: &str) {
        if !self.index.contains_key(s) {
            self.index.insert(s.to_string(), self.items.len());
            self.items.push(s.to_string());
        }
    }

    pub fn get(&self, s: &str) -> usize {
        self.index.get(s).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl From<Vec<String>> for Vocab {
    fn from(mut items: Vec<String>) -> Self {
        if items.first().map(String::as_str) != Some(UNKNOWN) {
            items.insert(0, UNKNOWN.to_string());
        }
        let index = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Vocab { items, index }
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.items
    }
}

fn normalize_category(s: &str) -> String {
    s.trim().to_lowercase()
}

fn field_values(r: &Record, field: usize) -> Vec<String> {
    let one = |o: &Option<String>| vec![normalize_category(o.as_deref().unwrap_or(UNKNOWN))];
    match field {
        0 if r.subject.is_empty() => vec![UNKNOWN.to_string()],
        0 => r.subject.iter().map(|s| normalize_category(s)).collect(),
        1 => one(&r.speaker),
        2 => one(&r.job),
        3 => one(&r.state),
        4 => one(&r.party),
        _ => one(&r.context),
    }
}

/// Metadata-branch encoding: a vocabulary per categorical field and
/// standardization statistics for the five credit counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataEncoding {
    pub vocabs: Vec<Vocab>,
    pub count_mean: [f64; 5],
    pub count_std: [f64; 5],
}

/// Encoded metadata for one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatures {
    /// Vocabulary indices per field; `subject` may hold several.
    pub categories: Vec<Vec<usize>>,
    pub counts: [f64; 5],
}

impl MetadataEncoding {
    /// Builds vocabularies and count statistics from imputed training records.
    pub fn fit<'a>(train: impl IntoIterator<Item = &'a Record>) -> Result<Self> {
        let mut vocabs: Vec<Vocab> = (0..META_FIELDS.len()).map(|_| Vocab::new()).collect();
        let mut rows = Vec::new();
        for r in train {
            for (f, v) in vocabs.iter_mut().enumerate() {
                for s in field_values(r, f) {
                    v.insert(&s);
                }
            }
            rows.push(r.credit_counts().to_array());
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput(
                "metadata encoding needs training records",
            ));
        }
        let (count_mean, count_std) = column_stats(&rows);
        Ok(MetadataEncoding {
            vocabs,
            count_mean,
            count_std,
        })
    }

    pub fn vocab_sizes(&self) -> Vec<usize> {
        self.vocabs.iter().map(Vocab::len).collect()
    }

    pub fn standardize_counts(&self, c: &CreditCounts) -> [f64; 5] {
        let a = c.to_array();
        std::array::from_fn(|k| (a[k] - self.count_mean[k]) / self.count_std[k])
    }

    pub fn encode(&self, r: &Record) -> MetaFeatures {
        let categories = self
            .vocabs
            .iter()
            .enumerate()
            .map(|(f, v)| field_values(r, f).iter().map(|s| v.get(s)).collect())
            .collect();
        MetaFeatures {
            categories,
            counts: self.standardize_counts(&r.credit_counts()),
        }
    }
}

/// Mean and population standard deviation per column; a zero deviation becomes 1.
fn column_stats<const N: usize>(rows: &[[f64; N]]) -> ([f64; N], [f64; N]) {
    let n = rows.len() as f64;
    let mut mean = [0.0; N];
    for r in rows {
        for k in 0..N {
            mean[k] += r[k] / n;
        }
    }
    let mut std = [0.0; N];
    for r in rows {
        for k in 0..N {
            std[k] += (r[k] - mean[k]).powi(2) / n;
        }
    }
    for s in &mut std {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    (mean, std)
}

/// One record ready for a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub statement: EncodedSequence,
    pub justification: Option<EncodedSequence>,
    pub meta: MetaFeatures,
    /// Credit-branch input (imputed, unstandardized).
    pub counts: CreditCounts,
    /// Class index in the model's label space, when the record is labelled.
    pub class: usize,
}

/// Everything fitted on the training partition that is needed to encode a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub label_space: LabelSpace,
    pub impute: ImputeStats,
    pub metadata: MetadataEncoding,
    pub statement_max_len: usize,
    pub justification_max_len: usize,
    /// Whether the training records carried justifications.
    pub has_justification: bool,
}

impl Preprocessor {
    pub fn fit(
        records: &[Record],
        train: &[usize],
        table: &EmbeddingTable,
        config: &ModelConfig,
    ) -> Result<Self> {
        let train_recs: Vec<&Record> = train.iter().map(|&i| &records[i]).collect();
        let impute = ImputeStats::from_training(train_recs.iter().copied())?;
        let imputed: Vec<Record> = train_recs
            .iter()
            .map(|r| impute_record(r, &impute))
            .collect();
        let metadata = MetadataEncoding::fit(&imputed)?;
        let has_justification =
            !train_recs.is_empty() && train_recs.iter().all(|r| r.justification.is_some());

        let statement_max_len = match config.statement_max_len {
            Some(n) => n,
            None => average_length(
                train_recs
                    .iter()
                    .map(|r| in_vocab_len(&tokenize(&r.statement), table)),
            )?,
        };
        let justification_max_len = match config.justification_max_len {
            Some(n) => n,
            None if has_justification => average_length(train_recs.iter().map(|r| {
                in_vocab_len(&tokenize(r.justification.as_deref().unwrap_or("")), table)
            }))?,
            None => 1,
        };
        Ok(Preprocessor {
            label_space: config.label_space,
            impute,
            metadata,
            statement_max_len,
            justification_max_len,
            has_justification,
        })
    }

    pub fn encode(&self, record: &Record, table: &EmbeddingTable) -> Example {
        let r = impute_record(record, &self.impute);
        Example {
            statement: encode(&tokenize(&r.statement), table, self.statement_max_len),
            justification: r
                .justification
                .as_deref()
                .map(|j| encode(&tokenize(j), table, self.justification_max_len)),
            meta: self.metadata.encode(&r),
            counts: r.credit_counts(),
            class: self.label_space.class_of(r.label),
        }
    }

    pub fn encode_all(
        &self,
        records: &[Record],
        idx: &[usize],
        table: &EmbeddingTable,
    ) -> Vec<Example> {
        idx.iter()
            .map(|&i| self.encode(&records[i], table))
            .collect()
    }

    /// Regression features: mean statement vector, mean justification vector
    /// (when the training data had justifications) and the standardized counts.
    pub fn regression_features(&self, record: &Record, table: &EmbeddingTable) -> Vec<f64> {
        let r = impute_record(record, &self.impute);
        let mut x = table.mean_vector(&tokenize(&r.statement));
        if self.has_justification {
            x.extend(table.mean_vector(&tokenize(r.justification.as_deref().unwrap_or(""))));
        }
        x.extend(self.metadata.standardize_counts(&r.credit_counts()));
        x
    }
}
