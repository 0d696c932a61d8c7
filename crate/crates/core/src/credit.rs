//! Speaker credibility index.
//!
//! The credit history of a speaker is collapsed to a single ratio by
//! weighting each falsehood bucket (mostly-true 0.2, half-true 0.5,
//! barely-true 0.75, false 0.9, pants-on-fire 1.0) and dividing by the
//! total count. A learned scalar affine map followed by `tanh` turns the
//! ratio into the score. Higher scores mean a less reliable speaker.

use serde::{Deserialize, Serialize};

use crate::corpus::CreditCounts;

/// Fixed bucket weights. These are hyper-parameters and never trained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub mtc: f64,
    pub htc: f64,
    pub btc: f64,
    pub fc: f64,
    pub pfc: f64,
}

pub const CLASS_WEIGHTS: ClassWeights = ClassWeights {
    mtc: 0.2,
    htc: 0.5,
    btc: 0.75,
    fc: 0.9,
    pfc: 1.0,
};

impl Default for ClassWeights {
    fn default() -> Self {
        CLASS_WEIGHTS
    }
}

/// Class weights plus the learned scalar slope `w` and offset `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreditScoreParams {
    pub class_weights: ClassWeights,
    pub w: f64,
    pub b: f64,
}

impl CreditScoreParams {
    pub fn new(w: f64, b: f64) -> Self {
        CreditScoreParams {
            class_weights: CLASS_WEIGHTS,
            w,
            b,
        }
    }
}

impl Default for CreditScoreParams {
    /// `w = 1, b = 0`: the untrained score is `tanh(ratio)`.
    fn default() -> Self {
        CreditScoreParams::new(1.0, 0.0)
    }
}

pub fn weighted_ratio(c: &CreditCounts, weights: &ClassWeights) -> f64 {
    let total = c.mtc + c.htc + c.btc + c.fc + c.pfc;
    if total == 0.0 {
        return 0.0;
    }
    let weighted = weights.mtc * c.mtc
        + weights.htc * c.htc
        + weights.btc * c.btc
        + weights.fc * c.fc
        + weights.pfc * c.pfc;
    weighted / total
}

/// Weighted falsehood ratio in `[0.2, 1.0]`, or 0 for an empty history.
pub fn history_ratio(c: &CreditCounts) -> f64 {
    weighted_ratio(c, &CLASS_WEIGHTS)
}

pub fn credit_score(c: &CreditCounts, p: &CreditScoreParams) -> f64 {
    (p.w * weighted_ratio(c, &p.class_weights) + p.b).tanh()
}

/// Score together with its partial derivatives `(d/dw, d/db)`.
pub fn credit_score_with_grad(c: &CreditCounts, p: &CreditScoreParams) -> (f64, f64, f64) {
    let r = weighted_ratio(c, &p.class_weights);
    let s = (p.w * r + p.b).tanh();
    let d = 1.0 - s * s;
    (s, d * r, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(btc: u32, fc: u32, htc: u32, mtc: u32, pfc: u32) -> CreditCounts {
        CreditCounts::new(btc as f64, fc as f64, htc as f64, mtc as f64, pfc as f64)
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(history_ratio(&counts(0, 0, 0, 0, 0)), 0.0);
        assert!((history_ratio(&counts(0, 0, 0, 5, 0)) - 0.2).abs() < 1e-15);
        assert!((history_ratio(&counts(1, 1, 1, 1, 1)) - 0.67).abs() < 1e-15);
    }

    #[test]
    fn score_examples() {
        let p = CreditScoreParams::new(1.0, 0.0);
        assert!((credit_score(&counts(0, 0, 0, 5, 0), &p) - 0.197_375_320_224_904).abs() < 1e-12);
        assert!((credit_score(&counts(0, 0, 0, 0, 3), &p) - 0.761_594_155_955_765).abs() < 1e-12);
        let q = CreditScoreParams::new(-3.0, 0.4);
        assert_eq!(credit_score(&counts(0, 0, 0, 0, 0), &q), 0.4f64.tanh());
    }

    fn arb_counts() -> impl Strategy<Value = [u32; 5]> {
        prop::array::uniform5(0u32..50)
    }

    proptest! {
        #[test]
        fn ratio_bounds(c in arb_counts()) {
            let cc = counts(c[0], c[1], c[2], c[3], c[4]);
            let r = history_ratio(&cc);
            if cc.total() > 0.0 {
                prop_assert!((0.2 - 1e-12..=1.0 + 1e-12).contains(&r));
            } else {
                prop_assert_eq!(r, 0.0);
            }
        }

        #[test]
        fn ratio_scale_invariant(c in arb_counts(), m in 1u32..20) {
            let a = counts(c[0], c[1], c[2], c[3], c[4]);
            let b = counts(c[0] * m, c[1] * m, c[2] * m, c[3] * m, c[4] * m);
            prop_assert!((history_ratio(&a) - history_ratio(&b)).abs() < 1e-12);
        }

        #[test]
        fn gradient_matches_central_difference(
            c in arb_counts(), w in -3.0f64..3.0, b in -2.0f64..2.0
        ) {
            let cc = counts(c[0], c[1], c[2], c[3], c[4]);
            let p = CreditScoreParams::new(w, b);
            let (_, dw, db) = credit_score_with_grad(&cc, &p);
            let h = 1e-5;
            let fd_w = (credit_score(&cc, &CreditScoreParams::new(w + h, b))
                - credit_score(&cc, &CreditScoreParams::new(w - h, b))) / (2.0 * h);
            let fd_b = (credit_score(&cc, &CreditScoreParams::new(w, b + h))
                - credit_score(&cc, &CreditScoreParams::new(w, b - h))) / (2.0 * h);
            prop_assert!((dw - fd_w).abs() <= 1e-6 * dw.abs().max(fd_w.abs()).max(1e-3));
            prop_assert!((db - fd_b).abs() <= 1e-6 * db.abs().max(fd_b.abs()).max(1e-3));
        }
    }
}
