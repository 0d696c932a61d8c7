use serde::{Deserialize, Serialize};

use super::embeddings::{EmbeddingTable, PAD};
use crate::error::{Error, Result};

/// Fixed-length index array, post-padded with [`PAD`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedSequence {
    pub indices: Vec<usize>,
    pub true_length: usize,
}

impl EncodedSequence {
    pub fn max_len(&self) -> usize {
        self.indices.len()
    }

    /// The non-padding prefix.
    pub fn tokens(&self) -> &[usize] {
        &self.indices[..self.true_length]
    }
}

/// Drops OOV tokens, keeps the head of the sequence up to `max_len`, and pads.
///
/// # Panics
/// If `max_len` is zero.
pub fn encode<S: AsRef<str>>(
    tokens: &[S],
    table: &EmbeddingTable,
    max_len: usize,
) -> EncodedSequence {
    assert!(max_len >= 1, "max_len must be at least 1");
    let mut indices: Vec<usize> = tokens
        .iter()
        .filter_map(|t| table.lookup(t.as_ref()))
        .take(max_len)
        .collect();
    let true_length = indices.len();
    indices.resize(max_len, PAD);
    EncodedSequence {
        indices,
        true_length,
    }
}

pub fn decode(seq: &EncodedSequence, table: &EmbeddingTable) -> Vec<String> {
    seq.tokens()
        .iter()
        .filter_map(|&i| table.token(i).map(str::to_string))
        .collect()
}

/// Number of tokens that survive the OOV drop.
pub fn in_vocab_len<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> usize {
    tokens
        .iter()
        .filter(|t| table.lookup(t.as_ref()).is_some())
        .count()
}

/// Mean of the given lengths rounded to the nearest integer, at least 1.
pub fn average_length<I: IntoIterator<Item = usize>>(lengths: I) -> Result<usize> {
    let (sum, n) = lengths
        .into_iter()
        .fold((0usize, 0usize), |(s, n), l| (s + l, n + 1));
    if n == 0 {
        return Err(Error::EmptyInput("average length of an empty corpus"));
    }
    Ok(((sum as f64 / n as f64).round() as usize).max(1))
}
