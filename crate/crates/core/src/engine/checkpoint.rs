//! Binary checkpoint: named tensors plus run metadata.
//!
//! Layout:
//!
//! ```text
//! magic    8 bytes   "FNCKPT01"
//! hlen     u64 LE    length of the JSON header
//! header   hlen bytes  {"metadata": {...}, "tensors": [{"name", "shape", "trainable"}, ...]}
//! values   f64 LE    every tensor's values, row-major, in header order
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::tensor::Tensor;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"FNCKPT01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub config_hash: String,
    /// Free-form payload (model config, preprocessing state).
    #[serde(default)]
    pub extra: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct TensorHeader {
    name: String,
    shape: Vec<usize>,
    trainable: bool,
}

#[derive(Serialize, Deserialize)]
struct Header {
    metadata: CheckpointMeta,
    tensors: Vec<TensorHeader>,
}

pub fn checkpoint_to_bytes(store: &ParamStore, meta: &CheckpointMeta) -> Result<Vec<u8>> {
    let header = Header {
        metadata: meta.clone(),
        tensors: store
            .entries()
            .iter()
            .map(|e| TensorHeader {
                name: e.name.clone(),
                shape: e.tensor.shape().to_vec(),
                trainable: e.trainable,
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let n_values: usize = store.entries().iter().map(|e| e.tensor.len()).sum();
    let mut out = Vec::with_capacity(16 + json.len() + 8 * n_values);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for e in store.entries() {
        for v in e.tensor.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<(ParamStore, CheckpointMeta)> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad("missing magic header"));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = bytes.get(16..).ok_or_else(|| bad("truncated"))?;
    if body.len() < hlen {
        return Err(bad("truncated header"));
    }
    let header: Header = serde_json::from_slice(&body[..hlen])?;
    let mut values = body[hlen..].chunks_exact(8);
    let mut store = ParamStore::new();
    for t in header.tensors {
        let n: usize = t.shape.iter().product();
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            let chunk = values.next().ok_or_else(|| bad("truncated tensor data"))?;
            data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
        }
        store.add(t.name, Tensor::new(t.shape, data)?, t.trainable)?;
    }
    if values.next().is_some() || !values.remainder().is_empty() {
        return Err(bad("trailing bytes after tensor data"));
    }
    Ok((store, header.metadata))
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    store: &ParamStore,
    meta: &CheckpointMeta,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint_to_bytes(store, meta)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ParamStore, CheckpointMeta)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(
            vals in prop::collection::vec(prop::num::f64::ANY, 1..40),
            seed in any::<u64>()
        ) {
            let mut store = ParamStore::new();
            store.add("a", Tensor::vector(vals.clone()), true).unwrap();
            store.add("b.weight", Tensor::matrix(1, 2, vec![-0.0, 1e-300]).unwrap(), false).unwrap();
            let meta = CheckpointMeta { seed, config_hash: "abc".into(), extra: serde_json::json!({"k": 1}) };
            let bytes = checkpoint_to_bytes(&store, &meta).unwrap();
            let (back, m2) = checkpoint_from_bytes(&bytes).unwrap();
            prop_assert_eq!(&m2, &meta);
            for (x, y) in store.entries().iter().zip(back.entries()) {
                prop_assert_eq!(&x.name, &y.name);
                prop_assert_eq!(x.trainable, y.trainable);
                let xb: Vec<u64> = x.tensor.data().iter().map(|v| v.to_bits()).collect();
                let yb: Vec<u64> = y.tensor.data().iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(xb, yb);
            }
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(checkpoint_from_bytes(b"nope").is_err());
        let mut store = ParamStore::new();
        store
            .add("a", Tensor::vector(vec![1.0, 2.0]), true)
            .unwrap();
        let meta = CheckpointMeta {
            seed: 0,
            config_hash: String::new(),
            extra: serde_json::Value::Null,
        };
        let bytes = checkpoint_to_bytes(&store, &meta).unwrap();
        assert!(checkpoint_from_bytes(&bytes[..bytes.len() - 3]).is_err());
    }
}
