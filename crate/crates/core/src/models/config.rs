use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::LabelSpace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Least squares on integer-coded labels, rounded to the nearest class.
    Linreg,
    /// One binary logistic regression per class.
    LogregOvr,
    /// Proportional-odds model.
    OrdinalLogreg,
    /// Statement + metadata branches.
    Seq,
    /// Statement + metadata + justification branches.
    SeqJust,
    /// Statement + metadata + justification + credit-score branches.
    Enhanced,
    /// `SeqJust` with one encoder shared by the statement and justification branches.
    SiameseShared,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Linreg,
        ModelKind::LogregOvr,
        ModelKind::OrdinalLogreg,
        ModelKind::Seq,
        ModelKind::SeqJust,
        ModelKind::Enhanced,
        ModelKind::SiameseShared,
    ];

    pub fn is_regression(self) -> bool {
        matches!(
            self,
            ModelKind::Linreg | ModelKind::LogregOvr | ModelKind::OrdinalLogreg
        )
    }

    pub fn has_justification(self) -> bool {
        matches!(
            self,
            ModelKind::SeqJust | ModelKind::Enhanced | ModelKind::SiameseShared
        )
    }

    pub fn has_credit(self) -> bool {
        self == ModelKind::Enhanced
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linreg => "linreg",
            ModelKind::LogregOvr => "logreg-ovr",
            ModelKind::OrdinalLogreg => "ordinal-logreg",
            ModelKind::Seq => "seq",
            ModelKind::SeqJust => "seq-just",
            ModelKind::Enhanced => "enhanced",
            ModelKind::SiameseShared => "siamese-shared",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                let names: Vec<_> = ModelKind::ALL.iter().map(|k| k.as_str()).collect();
                format!(
                    "unknown model kind {s:?} (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Declarative description of a classifier. Serialized as TOML with these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub label_space: LabelSpace,
    pub statement_width: usize,
    pub metadata_width: usize,
    pub justification_width: usize,
    pub credit_width: usize,
    pub lstm_hidden: usize,
    pub statement_dropout: f64,
    pub justification_dropout: f64,
    /// `None`: the rounded average in-vocabulary length of the training statements.
    pub statement_max_len: Option<usize>,
    pub justification_max_len: Option<usize>,
    pub shared_encoder: bool,
    pub metadata_embedding_dim: usize,
    pub embedding_dim: usize,
    pub trainable_embeddings: bool,
    /// L2 penalty of the regression baselines (`½·l2·‖β‖²` on the summed log-loss).
    pub l2: f64,
}

impl ModelConfig {
    pub fn new(kind: ModelKind, label_space: LabelSpace) -> Self {
        ModelConfig {
            kind,
            label_space,
            statement_width: 32,
            metadata_width: 64,
            justification_width: 32,
            credit_width: 1,
            lstm_hidden: 128,
            statement_dropout: 0.15,
            justification_dropout: if kind == ModelKind::Enhanced {
                0.21
            } else {
                0.2
            },
            statement_max_len: None,
            justification_max_len: None,
            shared_encoder: kind == ModelKind::SiameseShared,
            metadata_embedding_dim: 16,
            embedding_dim: 100,
            trainable_embeddings: false,
            l2: 1.0,
        }
    }

    pub fn has_justification(&self) -> bool {
        self.kind.has_justification()
    }

    pub fn has_credit(&self) -> bool {
        self.kind.has_credit()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for (name, rate) in [
            ("statement_dropout", self.statement_dropout),
            ("justification_dropout", self.justification_dropout),
        ] {
            if !(0.0..1.0).contains(&rate) {
                return bad(format!("{name} = {rate} must be in [0, 1)"));
            }
        }
        if self.credit_width != 1 {
            return bad(format!("credit_width must be 1, got {}", self.credit_width));
        }
        for (name, v) in [
            ("statement_width", self.statement_width),
            ("metadata_width", self.metadata_width),
            ("justification_width", self.justification_width),
            ("lstm_hidden", self.lstm_hidden),
            ("metadata_embedding_dim", self.metadata_embedding_dim),
            ("embedding_dim", self.embedding_dim),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.statement_max_len == Some(0) || self.justification_max_len == Some(0) {
            return bad("max_len values must be at least 1".into());
        }
        if self.shared_encoder && !self.has_justification() {
            return bad(format!(
                "shared_encoder needs a justification branch ({} has none)",
                self.kind
            ));
        }
        if self.kind == ModelKind::SiameseShared && !self.shared_encoder {
            return bad("siamese-shared requires shared_encoder = true".into());
        }
        if self.shared_encoder && self.statement_width != self.justification_width {
            return bad("shared encoder needs equal statement and justification widths".into());
        }
        if self.l2 < 0.0 {
            return bad("l2 must be non-negative".into());
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ModelConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
