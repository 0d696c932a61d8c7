//! Synthetic LIAR-shaped corpora for tests, smoke runs and benchmarks.
//!
//! Labels leave traces in the statement (weak), the justification (strong)
//! and the speaker's history counts, so every branch has something to learn.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{HistoryCounts, LabelSix, Record};
use crate::text::EmbeddingTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub seed: u64,
    pub justification: bool,
    pub embedding_dim: usize,
    /// Probability that a statement cue word is drawn from the label's own pool.
    pub statement_signal: f64,
    /// Same, for justification cue words.
    pub justification_signal: f64,
}

impl SynthSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        SynthSpec {
            n,
            seed,
            justification: true,
            embedding_dim: 16,
            statement_signal: 0.6,
            justification_signal: 0.9,
        }
    }
}

const NEUTRAL: usize = 150;
const CUES_PER_LABEL: usize = 8;
const SPEAKERS: usize = 40;

fn neutral_word(i: usize) -> String {
    format!("word{i}")
}

fn cue_word(label: usize, i: usize) -> String {
    format!("cue{label}x{i}")
}

/// Every token the generator can emit, with seeded random vectors.
pub fn synthetic_table(dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7AB1E);
    let mut tokens: Vec<String> = (0..NEUTRAL).map(neutral_word).collect();
    for l in 0..6 {
        tokens.extend((0..CUES_PER_LABEL).map(|i| cue_word(l, i)));
    }
    EmbeddingTable::from_entries(
        dim,
        tokens.into_iter().map(|t| {
            (
                t,
                (0..dim)
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect::<Vec<f64>>(),
            )
        }),
    )
    .expect("generated tokens are unique")
}

fn sentence(rng: &mut ChaCha8Rng, label: usize, len: usize, cues: usize, signal: f64) -> String {
    let mut words: Vec<String> = (0..len)
        .map(|_| neutral_word(rng.random_range(0..NEUTRAL)))
        .collect();
    for _ in 0..cues {
        let l = if rng.random::<f64>() < signal {
            label
        } else {
            rng.random_range(0..6)
        };
        let pos = rng.random_range(0..=words.len());
        words.insert(pos, cue_word(l, rng.random_range(0..CUES_PER_LABEL)));
    }
    let mut s = words.join(" ");
    s.push('.');
    s
}

/// Generates `(records, table)`; the table covers every generated token.
pub fn synthetic_corpus(spec: &SynthSpec) -> (Vec<Record>, EmbeddingTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // each speaker leans toward a label; history counts follow the lean
    let leans: Vec<usize> = (0..SPEAKERS).map(|_| rng.random_range(0..6)).collect();
    let histories: Vec<[f64; 5]> = leans
        .iter()
        .map(|&lean| {
            let mut base =
                |k: usize| rng.random_range(0..4) as f64 + if k == lean { 12.0 } else { 0.0 };
            // order btc, fc, htc, mtc, pfc
            [base(2), base(1), base(3), base(4), base(0)]
        })
        .collect();
    let subjects = [
        "economy",
        "health-care",
        "taxes",
        "education",
        "jobs",
        "immigration",
        "energy",
    ];
    let parties = ["republican", "democrat", "none", "independent"];
    let states = ["Texas", "Ohio", "Florida", "New York", "Virginia"];
    let contexts = [
        "a speech",
        "a tweet",
        "an interview",
        "a debate",
        "a press release",
    ];

    let records = (0..spec.n)
        .map(|i| {
            let s = rng.random_range(0..SPEAKERS);
            let label = if rng.random::<f64>() < 0.5 {
                leans[s]
            } else {
                rng.random_range(0..6)
            };
            let len = rng.random_range(6..14);
            let statement = sentence(&mut rng, label, len, 2, spec.statement_signal);
            let justification = spec.justification.then(|| {
                let jl = rng.random_range(15..30);
                sentence(&mut rng, label, jl, 5, spec.justification_signal)
            });
            let n_subj = rng.random_range(1..3);
            let subject = (0..n_subj)
                .map(|_| subjects.choose(&mut rng).unwrap().to_string())
                .collect();
            let counts = if rng.random::<f64>() < 0.02 {
                HistoryCounts([None; 5])
            } else {
                HistoryCounts(histories[s].map(Some))
            };
            Record {
                id: format!("{}.json", 10_000 + i),
                label: LabelSix::ALL[label],
                statement,
                subject,
                speaker: Some(format!("speaker-{s}")),
                job: Some(if s % 3 == 0 {
                    "Senator".into()
                } else {
                    "Governor".into()
                }),
                state: Some(states[s % states.len()].to_string()),
                party: Some(parties[s % parties.len()].to_string()),
                counts,
                context: Some(contexts.choose(&mut rng).unwrap().to_string()),
                justification,
            }
        })
        .collect();
    (records, synthetic_table(spec.embedding_dim, spec.seed))
}
