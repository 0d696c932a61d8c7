//! Confusion matrices and the accuracy / precision / recall / F1 family.

use serde::{Deserialize, Serialize};

use crate::corpus::LabelSix;
use crate::error::{Error, Result};

/// Square count matrix indexed `[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn from_predictions(truth: &[usize], pred: &[usize], n_classes: usize) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::shape(
                "confusion matrix",
                format!("{} labels, {} predictions", truth.len(), pred.len()),
            ));
        }
        let mut cm = ConfusionMatrix::new(n_classes);
        for (&t, &p) in truth.iter().zip(pred) {
            if t >= n_classes || p >= n_classes {
                return Err(Error::InvalidArgument(format!(
                    "class pair ({t}, {p}) out of range for {n_classes} classes"
                )));
            }
            cm.counts[t][p] += 1;
        }
        Ok(cm)
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.n_classes()).map(|c| self.counts[c][c]).sum()
    }

    /// One-vs-rest counts `(tp, fp, fn)` for class `c`.
    pub fn one_vs_rest(&self, c: usize) -> (u64, u64, u64) {
        let tp = self.counts[c][c];
        let fp = (0..self.n_classes())
            .map(|t| self.counts[t][c])
            .sum::<u64>()
            - tp;
        let fn_ = self.counts[c].iter().sum::<u64>() - tp;
        (tp, fp, fn_)
    }

    /// Binary view with fake (class 0) as the positive class.
    pub fn tp(&self) -> u64 {
        self.counts[0][0]
    }

    pub fn fn_(&self) -> u64 {
        self.counts[0].iter().sum::<u64>() - self.counts[0][0]
    }

    pub fn fp(&self) -> u64 {
        (1..self.n_classes()).map(|t| self.counts[t][0]).sum()
    }

    pub fn tn(&self) -> u64 {
        self.total() - self.tp() - self.fn_() - self.fp()
    }

    /// Collapses a six-way matrix into the binary (fake, real) matrix.
    pub fn collapse_to_binary(&self) -> Result<ConfusionMatrix> {
        if self.n_classes() != 6 {
            return Err(Error::InvalidArgument(format!(
                "collapse needs a six-way matrix, got {} classes",
                self.n_classes()
            )));
        }
        let b = |i: usize| LabelSix::ALL[i].to_binary().index();
        let mut out = ConfusionMatrix::new(2);
        for t in 0..6 {
            for p in 0..6 {
                out.counts[b(t)][b(p)] += self.counts[t][p];
            }
        }
        Ok(out)
    }
}

/// `num / den`, or 0 when the denominator is 0.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean, or 0 when `p + r = 0`.
pub fn f1_score(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Scores derived from a confusion matrix. For binary matrices `precision`,
/// `recall` and `f1` refer to the fake class; for six-way matrices they equal
/// the macro averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput("confusion matrix has no entries"));
    }
    let k = cm.n_classes();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let (tp, fp, fn_) = cm.one_vs_rest(c);
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            ClassMetrics {
                precision,
                recall,
                f1: f1_score(precision, recall),
                support: tp + fn_,
            }
        })
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    let macro_precision = mean(|m| m.precision);
    let macro_recall = mean(|m| m.recall);
    let macro_f1 = mean(|m| m.f1);
    let (precision, recall, f1) = if k == 2 {
        let p = ratio(cm.tp(), cm.tp() + cm.fp());
        let r = ratio(cm.tp(), cm.tp() + cm.fn_());
        (p, r, f1_score(p, r))
    } else {
        (macro_precision, macro_recall, macro_f1)
    };
    Ok(Metrics {
        accuracy: ratio(cm.correct(), total),
        precision,
        recall,
        f1,
        per_class,
        macro_precision,
        macro_recall,
        macro_f1,
    })
}
