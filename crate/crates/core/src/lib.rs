//! Fake-news classification on LIAR / LIAR-Plus.
//!
//! The crate covers the whole pipeline: TSV parsing and stratified splits
//! ([`corpus`]), the speaker credit score ([`credit`]), tokenization and
//! pretrained embeddings ([`text`]), a small reverse-mode training engine
//! ([`engine`]), the regression baselines and multi-branch LSTM networks
//! ([`models`]), and the train / cross-validate / compare harness ([`harness`]).

pub mod corpus;
pub mod credit;
pub mod engine;
pub mod error;
pub mod harness;
pub mod models;
pub mod synth;
pub mod text;

pub use corpus::{CreditCounts, LabelBinary, LabelSix, LabelSpace, Record, SplitSpec, Variant};
pub use credit::{credit_score, history_ratio, CreditScoreParams};
pub use engine::{ParamStore, Tensor};
pub use error::{Error, Result};
pub use models::{ModelConfig, ModelKind};
pub use text::{EmbeddingTable, EncodedSequence};
