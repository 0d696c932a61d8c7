//! Classifiers: regression baselines and branch networks.

pub mod config;
pub mod features;
pub mod network;
pub mod regression;

pub use config::{ModelConfig, ModelKind};
pub use features::{Example, MetaFeatures, MetadataEncoding, Preprocessor, Vocab, META_FIELDS};
pub use network::{decide, Encoder, ForwardNodes, ForwardOutput, Layout, Network, META_COUNTS};
pub use regression::{argmax, fit_regression, RegressionHyper, RegressionModel, Standardizer};
