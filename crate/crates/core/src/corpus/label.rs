use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The six-grained PolitiFact veracity scale, ordered from least to most truthful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSix {
    PantsOnFire = 0,
    False = 1,
    BarelyTrue = 2,
    HalfTrue = 3,
    MostlyTrue = 4,
    True = 5,
}

impl LabelSix {
    pub const ALL: [LabelSix; 6] = [
        LabelSix::PantsOnFire,
        LabelSix::False,
        LabelSix::BarelyTrue,
        LabelSix::HalfTrue,
        LabelSix::MostlyTrue,
        LabelSix::True,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Canonical spelling used by the normalized TSV writer (matches the raw LIAR files).
    pub fn as_str(self) -> &'static str {
        match self {
            LabelSix::PantsOnFire => "pants-fire",
            LabelSix::False => "false",
            LabelSix::BarelyTrue => "barely-true",
            LabelSix::HalfTrue => "half-true",
            LabelSix::MostlyTrue => "mostly-true",
            LabelSix::True => "true",
        }
    }

    pub fn to_binary(self) -> LabelBinary {
        to_binary(self)
    }
}

impl fmt::Display for LabelSix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelSix {
    type Err = String;

    /// Case-insensitive; accepts both `pants-fire` and `pants-on-fire`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let label = match lower.as_str() {
            "pants-fire" | "pants-on-fire" => LabelSix::PantsOnFire,
            "false" => LabelSix::False,
            "barely-true" => LabelSix::BarelyTrue,
            "half-true" => LabelSix::HalfTrue,
            "mostly-true" => LabelSix::MostlyTrue,
            "true" => LabelSix::True,
            _ => return Err(format!("unknown label {s:?}")),
        };
        Ok(label)
    }
}

/// Collapsed two-class label. `False` (fake) is the positive class for binary metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LabelBinary {
    False = 0,
    True = 1,
}

impl LabelBinary {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(LabelBinary::False),
            1 => Some(LabelBinary::True),
            _ => None,
        }
    }
}

impl fmt::Display for LabelBinary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelBinary::False => "FALSE",
            LabelBinary::True => "TRUE",
        })
    }
}

/// pants-on-fire, false and barely-true collapse to FALSE; the other three to TRUE.
pub fn to_binary(label: LabelSix) -> LabelBinary {
    if label <= LabelSix::BarelyTrue {
        LabelBinary::False
    } else {
        LabelBinary::True
    }
}

/// Which label space a model or report works in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSpace {
    Binary,
    Six,
}

impl LabelSpace {
    pub fn n_classes(self) -> usize {
        match self {
            LabelSpace::Binary => 2,
            LabelSpace::Six => 6,
        }
    }

    /// Class index of a six-grained label in this space.
    pub fn class_of(self, label: LabelSix) -> usize {
        match self {
            LabelSpace::Binary => to_binary(label).index(),
            LabelSpace::Six => label.index(),
        }
    }

    pub fn class_name(self, class: usize) -> String {
        match self {
            LabelSpace::Binary => LabelBinary::from_index(class)
                .map(|l| l.to_string())
                .unwrap_or_else(|| format!("class-{class}")),
            LabelSpace::Six => LabelSix::from_index(class)
                .map(|l| l.to_string())
                .unwrap_or_else(|| format!("class-{class}")),
        }
    }
}

impl fmt::Display for LabelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelSpace::Binary => "binary",
            LabelSpace::Six => "six",
        })
    }
}

impl FromStr for LabelSpace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "binary" | "2" => Ok(LabelSpace::Binary),
            "six" | "6" => Ok(LabelSpace::Six),
            _ => Err(format!(
                "unknown label space {s:?} (expected binary or six)"
            )),
        }
    }
}
