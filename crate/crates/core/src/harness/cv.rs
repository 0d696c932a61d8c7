//! Stratified k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{summarize, CVReport};
use super::train::{derive_seed, train_eval, TrainConfig};
use crate::corpus::{stratified_folds_by_class, Record, SplitSpec};
use crate::error::{Error, Result};
use crate::models::ModelConfig;
use crate::text::EmbeddingTable;

/// Fraction of each fold's training portion held out for early stopping.
pub const INNER_VALIDATION_FRACTION: f64 = 0.1;

/// Per-class shuffled holdout of `frac` of `members` (at least one item from
/// every class with two or more members). Returns `(kept, held_out)`.
pub fn stratified_holdout(
    members: &[usize],
    classes: &[usize],
    frac: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let n_classes = classes.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); n_classes];
    for (&m, &c) in members.iter().zip(classes) {
        by_class[c].push(m);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut kept, mut held) = (Vec::new(), Vec::new());
    for group in &mut by_class {
        group.shuffle(&mut rng);
        let mut h = (group.len() as f64 * frac).round() as usize;
        if h == 0 && group.len() >= 2 {
            h = 1;
        }
        held.extend_from_slice(&group[..h]);
        kept.extend_from_slice(&group[h..]);
    }
    kept.sort_unstable();
    held.sort_unstable();
    (kept, held)
}

/// Cross-validates over `pool` (record indices, typically train ∪ validation).
/// Folds train independently and in parallel; fold `i` uses seed
/// `derive_seed(seed, i + 1)`.
pub fn cross_validate(
    config: &ModelConfig,
    records: &[Record],
    pool: &[usize],
    k: usize,
    seed: u64,
    train_cfg: &TrainConfig,
    table: &EmbeddingTable,
) -> Result<CVReport> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    let space = config.label_space;
    let classes: Vec<usize> = pool
        .iter()
        .map(|&i| space.class_of(records[i].label))
        .collect();
    let folds = stratified_folds_by_class(&classes, space.n_classes(), k, seed, |c| {
        space.class_name(c)
    })?;

    let reports = folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let fold_seed = derive_seed(seed, f as u64 + 1);
            let test: Vec<usize> = fold.test.iter().map(|&p| pool[p]).collect();
            let train_all: Vec<usize> = fold.train.iter().map(|&p| pool[p]).collect();
            let (train, validation) = if config.kind.is_regression() {
                (train_all, Vec::new())
            } else {
                let cls: Vec<usize> = fold.train.iter().map(|&p| classes[p]).collect();
                stratified_holdout(&train_all, &cls, INNER_VALIDATION_FRACTION, fold_seed)
            };
            let split = SplitSpec {
                train,
                validation,
                test,
                seed: fold_seed,
            };
            let cfg = TrainConfig {
                seed: fold_seed,
                ..train_cfg.clone()
            };
            train_eval(config, records, &split, &cfg, table).map(|o| o.report)
        })
        .collect::<Result<Vec<_>>>()?;

    let (mean, variance) = summarize(&reports)?;
    Ok(CVReport {
        model: config.kind,
        label_space: space,
        config_hash: config.hash(),
        seed,
        k,
        folds: reports,
        mean,
        variance,
        variance_kind: "population".into(),
        notes: vec![format!(
            "stratified {k}-fold over {} records; networks early-stop on a stratified {:.0}% holdout of each training fold",
            pool.len(),
            INNER_VALIDATION_FRACTION * 100.0
        )],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holdout_is_stratified_partition() {
        let members: Vec<usize> = (100..160).collect();
        let classes: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let (kept, held) = stratified_holdout(&members, &classes, 0.1, 4);
        assert_eq!(kept.len() + held.len(), 60);
        assert_eq!(held.len(), 6);
        for c in 0..3 {
            assert_eq!(held.iter().filter(|&&m| (m - 100) % 3 == c).count(), 2);
        }
        let mut all: Vec<usize> = kept.iter().chain(&held).copied().collect();
        all.sort_unstable();
        assert_eq!(all, members);
    }
}
