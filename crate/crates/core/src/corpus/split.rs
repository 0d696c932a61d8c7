use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::label::LabelSpace;
use super::record::Record;
use crate::error::{Error, Result};

/// Train / validation / test partitions of record indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

impl SplitSpec {
    /// Partitions for files concatenated in train, validation, test order.
    pub fn contiguous(n_train: usize, n_validation: usize, n_test: usize) -> Self {
        let a = n_train;
        let b = a + n_validation;
        SplitSpec {
            train: (0..a).collect(),
            validation: (a..b).collect(),
            test: (b..b + n_test).collect(),
            seed: 0,
        }
    }

    /// Seeded random split with the given validation and test fractions.
    pub fn random(n: usize, validation_frac: f64, test_frac: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&validation_frac)
            || !(0.0..1.0).contains(&test_frac)
            || validation_frac + test_frac >= 1.0
        {
            return Err(Error::InvalidArgument(format!(
                "split fractions {validation_frac} + {test_frac} must be in [0, 1)"
            )));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_test = (n as f64 * test_frac).round() as usize;
        let n_val = (n as f64 * validation_frac).round() as usize;
        let test = idx[..n_test].to_vec();
        let validation = idx[n_test..n_test + n_val].to_vec();
        let train = idx[n_test + n_val..].to_vec();
        Ok(SplitSpec {
            train,
            validation,
            test,
            seed,
        })
    }

    /// Checks the partitions are pairwise disjoint and cover `0..n` exactly once.
    pub fn validate(&self, n: usize) -> Result<()> {
        let seen = self.check_disjoint(n)?;
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "split does not cover index {missing}"
            )));
        }
        Ok(())
    }

    /// Checks the partitions are pairwise disjoint and in range, allowing
    /// records that belong to no partition.
    pub fn validate_disjoint(&self, n: usize) -> Result<()> {
        self.check_disjoint(n).map(|_| ())
    }

    fn check_disjoint(&self, n: usize) -> Result<Vec<bool>> {
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.validation).chain(&self.test) {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "split index {i} out of range {n}"
                )));
            }
            if seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "split index {i} appears twice"
                )));
            }
            seen[i] = true;
        }
        Ok(seen)
    }

    pub fn manifest(&self, records: &[Record]) -> SplitManifest {
        let ids = |v: &[usize]| v.iter().map(|&i| records[i].id.clone()).collect();
        SplitManifest {
            seed: self.seed,
            train: ids(&self.train),
            validation: ids(&self.validation),
            test: ids(&self.test),
        }
    }
}

/// Record ids per partition, as written next to prepared data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

impl SplitManifest {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Resolves ids back to indices into `records`.
    pub fn resolve(&self, records: &[Record]) -> Result<SplitSpec> {
        let mut by_id = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            if by_id.insert(r.id.as_str(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate record id {:?}",
                    r.id
                )));
            }
        }
        let look = |ids: &[String]| -> Result<Vec<usize>> {
            ids.iter()
                .map(|id| {
                    by_id.get(id.as_str()).copied().ok_or_else(|| {
                        Error::InvalidArgument(format!("manifest id {id:?} not in data"))
                    })
                })
                .collect()
        };
        Ok(SplitSpec {
            train: look(&self.train)?,
            validation: look(&self.validation)?,
            test: look(&self.test)?,
            seed: self.seed,
        })
    }
}

/// One cross-validation fold: positions used for training and for testing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn stratified_folds(
    records: &[Record],
    k: usize,
    seed: u64,
    label_space: LabelSpace,
) -> Result<Vec<Fold>> {
    let classes: Vec<usize> = records
        .iter()
        .map(|r| label_space.class_of(r.label))
        .collect();
    stratified_folds_by_class(&classes, label_space.n_classes(), k, seed, |c| {
        label_space.class_name(c)
    })
}

/// Stratified k-fold over positions `0..classes.len()`.
///
/// Each class is shuffled with its own seeded pass and dealt round-robin,
/// starting where the previous class stopped, so per-class and total test
/// fold sizes both differ by at most one.
pub fn stratified_folds_by_class(
    classes: &[usize],
    n_classes: usize,
    k: usize,
    seed: u64,
    class_name: impl Fn(usize) -> String,
) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in classes.iter().enumerate() {
        if c >= n_classes {
            return Err(Error::InvalidArgument(format!(
                "class index {c} out of range"
            )));
        }
        by_class[c].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class: class_name(c),
                count: members.len(),
                k,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            tests[next].push(i);
            next = (next + 1) % k;
        }
    }

    let n = classes.len();
    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; n];
            for &i in &test {
                in_test[i] = true;
            }
            let train = (0..n).filter(|&i| !in_test[i]).collect();
            Fold { train, test }
        })
        .collect())
}
