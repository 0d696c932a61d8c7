//! Pairwise comparison of reports evaluated on the same test split.

use serde::{Deserialize, Serialize};

use super::report::MetricsReport;
use crate::corpus::LabelSpace;
use crate::error::{Error, Result};
use crate::models::ModelKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDelta {
    pub a: String,
    pub b: String,
    /// `accuracy(b) - accuracy(a)`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub claim: String,
    pub better: String,
    pub worse: String,
    pub delta: Option<f64>,
    /// `None` when either side is missing from the inputs.
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub label_space: LabelSpace,
    pub test_split_hash: String,
    pub accuracies: Vec<(String, f64)>,
    pub pairs: Vec<PairDelta>,
    pub hypotheses: Vec<Hypothesis>,
}

fn accuracy_of(reports: &[(String, MetricsReport)], kind: ModelKind) -> Option<(&str, f64)> {
    reports
        .iter()
        .find(|(_, r)| r.model == kind)
        .map(|(n, r)| (n.as_str(), r.test.accuracy))
}

fn hypothesis(
    claim: &str,
    reports: &[(String, MetricsReport)],
    better: ModelKind,
    worse: ModelKind,
) -> Hypothesis {
    let b = accuracy_of(reports, better);
    let w = accuracy_of(reports, worse);
    let delta = b.zip(w).map(|(b, w)| b.1 - w.1);
    Hypothesis {
        claim: claim.to_string(),
        better: b.map_or(better.to_string(), |x| x.0.to_string()),
        worse: w.map_or(worse.to_string(), |x| x.0.to_string()),
        delta,
        holds: delta.map(|d| d > 0.0),
    }
}

pub fn compare(reports: &[(String, MetricsReport)]) -> Result<Comparison> {
    let (_, first) = reports
        .first()
        .ok_or(Error::EmptyInput("no reports to compare"))?;
    for (name, r) in reports {
        if r.label_space != first.label_space {
            return Err(Error::Mismatch(format!(
                "{name} uses label space {}, expected {}",
                r.label_space, first.label_space
            )));
        }
        if r.test_split_hash != first.test_split_hash {
            return Err(Error::Mismatch(format!(
                "{name} was evaluated on a different test split"
            )));
        }
    }
    let mut pairs = Vec::new();
    for (i, (na, ra)) in reports.iter().enumerate() {
        for (nb, rb) in &reports[i + 1..] {
            pairs.push(PairDelta {
                a: na.clone(),
                b: nb.clone(),
                delta: rb.test.accuracy - ra.test.accuracy,
            });
        }
    }

    let mut hypotheses = vec![
        hypothesis(
            "justification helps",
            reports,
            ModelKind::SeqJust,
            ModelKind::Seq,
        ),
        hypothesis(
            "metadata and credit score help",
            reports,
            ModelKind::Enhanced,
            ModelKind::SeqJust,
        ),
    ];
    // each sequence model against the strongest regression baseline present
    let baseline = reports
        .iter()
        .filter(|(_, r)| r.model.is_regression())
        .max_by(|a, b| a.1.test.accuracy.total_cmp(&b.1.test.accuracy))
        .map(|(_, r)| r.model);
    for kind in [
        ModelKind::Seq,
        ModelKind::SeqJust,
        ModelKind::Enhanced,
        ModelKind::SiameseShared,
    ] {
        if accuracy_of(reports, kind).is_none() {
            continue;
        }
        let claim = format!("{kind} beats the regression baseline");
        hypotheses.push(match baseline {
            Some(base) => hypothesis(&claim, reports, kind, base),
            None => Hypothesis {
                claim,
                better: kind.to_string(),
                worse: "regression baseline".into(),
                delta: None,
                holds: None,
            },
        });
    }

    Ok(Comparison {
        label_space: first.label_space,
        test_split_hash: first.test_split_hash.clone(),
        accuracies: reports
            .iter()
            .map(|(n, r)| (n.clone(), r.test.accuracy))
            .collect(),
        pairs,
        hypotheses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::metrics::{metrics, ConfusionMatrix};
    use crate::harness::report::LossHistory;

    fn report(kind: ModelKind, hits: u64, split: &str) -> MetricsReport {
        let cm = ConfusionMatrix {
            counts: vec![vec![hits, 10 - hits], vec![0, 10]],
        };
        let m = metrics(&cm).unwrap();
        MetricsReport {
            model: kind,
            label_space: LabelSpace::Binary,
            config_hash: String::new(),
            seed: 0,
            split_manifest: String::new(),
            test_split_hash: split.into(),
            threshold: 0.5,
            n_test: 20,
            confusion: cm,
            test: m.clone(),
            train_metrics: m,
            loss_history: LossHistory::default(),
            best_epoch: None,
            partition_sizes: [0, 0, 20],
            notes: Vec::new(),
        }
    }

    #[test]
    fn identical_reports_zero_delta() {
        let r = report(ModelKind::Seq, 5, "t");
        let c = compare(&[("a".into(), r.clone()), ("b".into(), r)]).unwrap();
        assert_eq!(c.pairs[0].delta, 0.0);
    }

    #[test]
    fn orderings() {
        let c = compare(&[
            ("seq".into(), report(ModelKind::Seq, 4, "t")),
            ("sj".into(), report(ModelKind::SeqJust, 6, "t")),
            ("enh".into(), report(ModelKind::Enhanced, 8, "t")),
            ("lr".into(), report(ModelKind::Linreg, 2, "t")),
        ])
        .unwrap();
        assert!(c.hypotheses.iter().all(|h| h.holds == Some(true)));
        assert_eq!(c.hypotheses.len(), 5);
    }

    #[test]
    fn mismatched_split_rejected() {
        let e = compare(&[
            ("a".into(), report(ModelKind::Seq, 4, "t")),
            ("b".into(), report(ModelKind::SeqJust, 6, "u")),
        ]);
        assert!(matches!(e, Err(Error::Mismatch(_))));
    }
}
