//! Config resolution: built-in defaults, then the `--config` file, then flags.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fakenews_core::corpus::LabelSpace;
use fakenews_core::harness::TrainConfig;
use fakenews_core::models::{ModelConfig, ModelKind};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::args::{ModelFlags, TrainFlags};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    model: Table,
    #[serde(default)]
    train: Table,
}

fn set<T: Into<Value>>(t: &mut Table, key: &str, v: Option<T>) {
    if let Some(v) = v {
        t.insert(key.to_string(), v.into());
    }
}

fn model_overrides(f: &ModelFlags) -> Table {
    let mut t = Table::new();
    set(&mut t, "kind", f.kind.map(|k| k.as_str()));
    set(&mut t, "label_space", f.label_space.map(|s| s.to_string()));
    let int = |v: Option<usize>| v.map(|v| v as i64);
    set(&mut t, "statement_width", int(f.statement_width));
    set(&mut t, "metadata_width", int(f.metadata_width));
    set(&mut t, "justification_width", int(f.justification_width));
    set(&mut t, "credit_width", int(f.credit_width));
    set(&mut t, "lstm_hidden", int(f.lstm_hidden));
    set(&mut t, "statement_dropout", f.statement_dropout);
    set(&mut t, "justification_dropout", f.justification_dropout);
    set(&mut t, "statement_max_len", int(f.statement_max_len));
    set(
        &mut t,
        "justification_max_len",
        int(f.justification_max_len),
    );
    set(&mut t, "shared_encoder", f.shared_encoder);
    set(
        &mut t,
        "metadata_embedding_dim",
        int(f.metadata_embedding_dim),
    );
    set(&mut t, "embedding_dim", int(f.embedding_dim));
    set(&mut t, "trainable_embeddings", f.trainable_embeddings);
    set(&mut t, "l2", f.l2);
    t
}

fn train_overrides(f: &TrainFlags) -> Result<Table> {
    let mut t = Table::new();
    let int = |v: Option<usize>| v.map(|v| v as i64);
    set(&mut t, "epochs", int(f.epochs));
    set(&mut t, "batch_size", int(f.batch_size));
    set(&mut t, "lr", f.lr);
    set(&mut t, "beta1", f.beta1);
    set(&mut t, "beta2", f.beta2);
    set(&mut t, "eps", f.eps);
    set(&mut t, "patience", int(f.patience));
    if let Some(s) = f.seed {
        let s = i64::try_from(s).context("--seed must fit in a signed 64-bit integer")?;
        t.insert("seed".into(), Value::Integer(s));
    }
    set(&mut t, "eval_batch_size", int(f.eval_batch_size));
    set(&mut t, "max_iter", int(f.max_iter));
    Ok(t)
}

fn overlay<T: Serialize + for<'de> Deserialize<'de>>(
    base: &T,
    layers: &[&Table],
    what: &str,
) -> Result<T> {
    let mut t = match Value::try_from(base)
        .with_context(|| format!("serializing default {what} config"))?
    {
        Value::Table(t) => t,
        _ => bail!("{what} config is not a table"),
    };
    for layer in layers {
        for (k, v) in layer.iter() {
            t.insert(k.clone(), v.clone());
        }
    }
    Value::Table(t)
        .try_into()
        .with_context(|| format!("invalid {what} config"))
}

pub fn resolve(path: Option<&Path>, model: &ModelFlags, train: &TrainFlags) -> Result<RunConfig> {
    let file = match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str::<FileConfig>(&text)
                .with_context(|| format!("parsing config {}", p.display()))?
        }
        None => FileConfig::default(),
    };
    let m_flags = model_overrides(model);
    let t_flags = train_overrides(train)?;

    let pick = |key: &str| {
        m_flags
            .get(key)
            .or_else(|| file.model.get(key))
            .and_then(Value::as_str)
    };
    let kind: ModelKind = match pick("kind") {
        Some(k) => k.parse().map_err(anyhow::Error::msg)?,
        None => bail!("no model kind given (use --kind or set kind in the [model] table)"),
    };
    let space: LabelSpace = match pick("label_space") {
        Some(s) => s.parse().map_err(anyhow::Error::msg)?,
        None => LabelSpace::Binary,
    };

    let model: ModelConfig = overlay(
        &ModelConfig::new(kind, space),
        &[&file.model, &m_flags],
        "model",
    )?;
    model.validate()?;
    let train: TrainConfig = overlay(
        &TrainConfig::for_model(kind, space),
        &[&file.train, &t_flags],
        "train",
    )?;
    train.validate()?;
    Ok(RunConfig { model, train })
}
