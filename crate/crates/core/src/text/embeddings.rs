use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Row index reserved for padding; its vector is all zeros.
pub const PAD: usize = 0;

/// Pretrained word vectors. Row 0 is the zero padding vector, real tokens
/// start at row 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vocab: HashMap<String, usize>,
    tokens: Vec<String>,
    vectors: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vocab: HashMap::new(),
            tokens: vec![String::new()],
            vectors: vec![0.0; dim],
        }
    }

    /// Builds a table from `(token, vector)` pairs in order.
    pub fn from_entries<I, S>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table = EmbeddingTable::new(dim);
        for (line, (tok, v)) in entries.into_iter().enumerate() {
            table
                .push(tok.into(), &v)
                .map_err(|message| Error::Embedding {
                    file: "<memory>".into(),
                    line: line + 1,
                    message,
                })?;
        }
        Ok(table)
    }

    fn push(&mut self, token: String, v: &[f64]) -> std::result::Result<usize, String> {
        if v.len() != self.dim {
            return Err(format!(
                "expected {} components, found {}",
                self.dim,
                v.len()
            ));
        }
        if self.vocab.contains_key(&token) {
            return Err(format!("duplicate token {token:?}"));
        }
        let idx = self.tokens.len();
        self.vocab.insert(token.clone(), idx);
        self.tokens.push(token);
        self.vectors.extend_from_slice(v);
        Ok(idx)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of real tokens, excluding the padding row.
    pub fn vocab_size(&self) -> usize {
        self.tokens.len() - 1
    }

    /// Number of matrix rows, `vocab_size() + 1`.
    pub fn rows(&self) -> usize {
        self.tokens.len()
    }

    pub fn lookup(&self, token: &str) -> Option<usize> {
        self.vocab.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        (index != PAD)
            .then(|| self.tokens.get(index).map(String::as_str))
            .flatten()
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.vectors[index * self.dim..(index + 1) * self.dim]
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.lookup(token).map(|i| self.row(i))
    }

    /// Row-major `rows() × dim()` matrix including the padding row.
    pub fn matrix(&self) -> &[f64] {
        &self.vectors
    }

    /// Keeps only tokens accepted by `keep`, renumbering rows in original order.
    pub fn retain(&self, mut keep: impl FnMut(&str) -> bool) -> EmbeddingTable {
        let mut out = EmbeddingTable::new(self.dim);
        for i in 1..self.rows() {
            let tok = &self.tokens[i];
            if keep(tok) {
                out.push(tok.clone(), self.row(i))
                    .expect("unique tokens of equal width");
            }
        }
        out
    }

    /// Mean of the in-vocabulary vectors; zeros when none are present.
    pub fn mean_vector<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        let mut n = 0usize;
        for t in tokens {
            if let Some(v) = self.vector(t.as_ref()) {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
                n += 1;
            }
        }
        if n > 0 {
            for a in &mut acc {
                *a /= n as f64;
            }
        }
        acc
    }
}

/// Loads a GloVe-style text file: `token v1 ... v_dim` per line, no header.
pub fn load_embeddings(path: impl AsRef<Path>, dim: usize) -> Result<EmbeddingTable> {
    load_embeddings_filtered(path, dim, |_| true)
}

/// Like [`load_embeddings`] but only keeps tokens accepted by `keep`.
/// Rejected lines are still checked for their component count.
pub fn load_embeddings_filtered(
    path: impl AsRef<Path>,
    dim: usize,
    mut keep: impl FnMut(&str) -> bool,
) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut table = EmbeddingTable::new(dim);
    let mut values = Vec::with_capacity(dim);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let err = |message: String| Error::Embedding {
            file: name.clone(),
            line: i + 1,
            message,
        };
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let token = parts.next().unwrap_or_default();
        values.clear();
        for p in parts {
            values.push(
                p.parse::<f64>()
                    .map_err(|_| err(format!("bad component {p:?}")))?,
            );
        }
        if values.len() != dim {
            return Err(err(format!(
                "expected {dim} components, found {}",
                values.len()
            )));
        }
        if keep(token) {
            table.push(token.to_string(), &values).map_err(err)?;
        }
    }
    Ok(table)
}
