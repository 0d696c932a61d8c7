use serde::{Deserialize, Serialize};

use super::record::Record;
use crate::error::{Error, Result};

/// Reserved category for missing or unseen categorical values.
pub const UNKNOWN: &str = "<unk>";

/// Training-partition statistics used to fill missing values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputeStats {
    /// Per-count training mean, in TSV column order (btc, fc, htc, mtc, pfc).
    pub count_means: [f64; 5],
    pub n_train: usize,
}

impl ImputeStats {
    pub fn from_training<'a, I>(train: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Record>,
    {
        let mut sums = [0.0; 5];
        let mut seen = [0usize; 5];
        let mut n = 0;
        for r in train {
            n += 1;
            for (k, v) in r.counts.0.iter().enumerate() {
                if let Some(v) = v {
                    sums[k] += v;
                    seen[k] += 1;
                }
            }
        }
        if n == 0 {
            return Err(Error::EmptyInput(
                "imputation statistics need a non-empty training set",
            ));
        }
        let mut count_means = [0.0; 5];
        for k in 0..5 {
            if seen[k] > 0 {
                count_means[k] = sums[k] / seen[k] as f64;
            }
        }
        Ok(ImputeStats {
            count_means,
            n_train: n,
        })
    }
}

/// Missing counts become the training mean; missing categorical fields become [`UNKNOWN`].
pub fn impute_missing(records: &[Record], stats: &ImputeStats) -> Vec<Record> {
    records.iter().map(|r| impute_record(r, stats)).collect()
}

pub fn impute_record(record: &Record, stats: &ImputeStats) -> Record {
    let mut r = record.clone();
    for (slot, mean) in r.counts.0.iter_mut().zip(stats.count_means) {
        if slot.is_none() {
            *slot = Some(mean);
        }
    }
    for field in [
        &mut r.speaker,
        &mut r.job,
        &mut r.state,
        &mut r.party,
        &mut r.context,
    ] {
        if field.is_none() {
            *field = Some(UNKNOWN.to_string());
        }
    }
    if r.subject.is_empty() {
        r.subject.push(UNKNOWN.to_string());
    }
    r
}
