use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::label::LabelSix;

/// Which published file layout a TSV follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// 14 columns: id, label, statement, subject, speaker, job, state, party,
    /// btc, fc, htc, mtc, pfc, context.
    Liar,
    /// The LIAR layout plus a trailing justification column.
    LiarPlus,
}

impl Variant {
    pub fn columns(self) -> usize {
        match self {
            Variant::Liar => 14,
            Variant::LiarPlus => 15,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Liar => "liar",
            Variant::LiarPlus => "liar-plus",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "liar" => Ok(Variant::Liar),
            "liar-plus" | "liarplus" | "liar_plus" => Ok(Variant::LiarPlus),
            _ => Err(format!(
                "unknown dataset variant {s:?} (expected liar or liar-plus)"
            )),
        }
    }
}

/// A speaker's credit history: how many earlier statements landed in each bucket.
///
/// Values are reals so imputed training means can be carried; parsed values are
/// always non-negative integers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CreditCounts {
    pub btc: f64,
    pub fc: f64,
    pub htc: f64,
    pub mtc: f64,
    pub pfc: f64,
}

impl CreditCounts {
    pub fn new(btc: f64, fc: f64, htc: f64, mtc: f64, pfc: f64) -> Self {
        CreditCounts {
            btc,
            fc,
            htc,
            mtc,
            pfc,
        }
    }

    /// Column order of the TSV: btc, fc, htc, mtc, pfc.
    pub fn to_array(self) -> [f64; 5] {
        [self.btc, self.fc, self.htc, self.mtc, self.pfc]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        CreditCounts::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub fn total(&self) -> f64 {
        self.to_array().iter().sum()
    }
}

/// Per-field credit history as parsed, where any count may be missing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HistoryCounts(pub [Option<f64>; 5]);

impl HistoryCounts {
    pub const FIELDS: [&'static str; 5] = [
        "barely_true_count",
        "false_count",
        "half_true_count",
        "mostly_true_count",
        "pants_on_fire_count",
    ];

    pub fn complete(counts: CreditCounts) -> Self {
        HistoryCounts(counts.to_array().map(Some))
    }

    /// `Some` only when none of the five counts is missing.
    pub fn credit_counts(&self) -> Option<CreditCounts> {
        let mut out = [0.0; 5];
        for (o, v) in out.iter_mut().zip(self.0) {
            *o = v?;
        }
        Some(CreditCounts::from_array(out))
    }

    pub fn has_missing(&self) -> bool {
        self.0.iter().any(Option::is_none)
    }
}

/// One fact-checked claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub label: LabelSix,
    pub statement: String,
    pub subject: Vec<String>,
    pub speaker: Option<String>,
    pub job: Option<String>,
    pub state: Option<String>,
    pub party: Option<String>,
    pub counts: HistoryCounts,
    pub context: Option<String>,
    /// Present (possibly empty) for LIAR-Plus rows, absent for LIAR rows.
    pub justification: Option<String>,
}

impl Record {
    /// Counts with missing fields read as zero. Use after imputation.
    pub fn credit_counts(&self) -> CreditCounts {
        CreditCounts::from_array(self.counts.0.map(|v| v.unwrap_or(0.0)))
    }
}
