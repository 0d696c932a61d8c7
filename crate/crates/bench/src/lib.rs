//! Fixtures shared by the benchmarks.

use fakenews_core::corpus::{LabelSpace, Record};
use fakenews_core::models::{Example, ModelConfig, ModelKind, Network, Preprocessor};
use fakenews_core::synth::{synthetic_corpus, SynthSpec};

/// A full-size enhanced network and a batch of encoded examples.
pub fn enhanced_fixture(batch: usize) -> (Network, Vec<Example>, Vec<Record>) {
    let (records, table) = synthetic_corpus(&SynthSpec {
        embedding_dim: 100,
        ..SynthSpec::new(batch.max(64), 1)
    });
    let config = ModelConfig::new(ModelKind::Enhanced, LabelSpace::Binary);
    let idx: Vec<usize> = (0..records.len()).collect();
    let pre = Preprocessor::fit(&records, &idx, &table, &config).expect("fixture preprocesses");
    let examples = pre.encode_all(&records, &idx[..batch], &table);
    let net =
        Network::build(&config, &table, &pre.metadata.vocab_sizes(), 1).expect("fixture builds");
    (net, examples, records)
}
