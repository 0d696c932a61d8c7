//! Training on fixed splits and the persisted classifier.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, ConfusionMatrix, Metrics};
use super::report::{ids_hash, manifest_hash, LossHistory, MetricsReport};
use crate::corpus::{LabelSpace, Record, SplitSpec};
use crate::engine::{
    adam_step, load_checkpoint, save_checkpoint, AdamConfig, AdamState, CheckpointMeta,
    EarlyStopping, Mode, ParamStore, StopDecision, Tensor,
};
use crate::error::{Error, Result};
use crate::models::{
    decide, fit_regression, Example, ModelConfig, ModelKind, Network, Preprocessor,
    RegressionHyper, RegressionModel,
};
use crate::text::{tokenize, EmbeddingTable};

/// Binary decision threshold on P(fake).
pub const THRESHOLD: f64 = 0.5;

/// Optimizer and schedule settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub patience: usize,
    pub seed: u64,
    /// Batch size for validation and test passes.
    pub eval_batch_size: usize,
    /// Iteration cap for the iterative regression fits.
    pub max_iter: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::for_model(ModelKind::Enhanced, LabelSpace::Binary)
    }
}

impl TrainConfig {
    /// Published schedule for each model: the enhanced model uses batch 256 for
    /// up to 500 epochs, the sequence models batch 512 for 120 (binary) or 40
    /// (six-way) epochs.
    pub fn for_model(kind: ModelKind, space: LabelSpace) -> Self {
        let (epochs, batch_size) = match (kind, space) {
            (ModelKind::Enhanced, _) => (500, 256),
            (_, LabelSpace::Binary) => (120, 512),
            (_, LabelSpace::Six) => (40, 512),
        };
        let adam = AdamConfig::default();
        TrainConfig {
            epochs,
            batch_size,
            lr: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            eps: adam.eps,
            patience: 15,
            seed: 0,
            eval_batch_size: 1024,
            max_iter: RegressionHyper::default().max_iter,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.eval_batch_size == 0 {
            return Err(Error::Config(
                "epochs and batch sizes must be positive".into(),
            ));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.lr)
            || !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || !positive(self.eps)
        {
            return Err(Error::Config("invalid Adam settings".into()));
        }
        Ok(())
    }
}

/// SplitMix64 step: derives independent child seeds from one run seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keeps only embedding rows for tokens that occur in `records`.
pub fn restrict_table<'a>(
    table: &EmbeddingTable,
    records: impl IntoIterator<Item = &'a Record>,
) -> EmbeddingTable {
    let mut seen = HashSet::new();
    for r in records {
        seen.extend(tokenize(&r.statement));
        if let Some(j) = &r.justification {
            seen.extend(tokenize(j));
        }
    }
    table.retain(|t| seen.contains(t))
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum ModelBody {
    Network(Network),
    Regression(RegressionModel),
}

/// A fitted classifier with everything needed to label raw records.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub preprocessor: Preprocessor,
    pub table: EmbeddingTable,
    pub body: ModelBody,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct SavedState {
    config: ModelConfig,
    preprocessor: Preprocessor,
    tokens: Vec<String>,
    meta_vocab_sizes: Vec<usize>,
}

const WORDS: &str = "embedding.words";

impl TrainedModel {
    pub fn label_space(&self) -> LabelSpace {
        self.config.label_space
    }

    pub fn n_classes(&self) -> usize {
        self.config.label_space.n_classes()
    }

    fn check_justification(&self, records: &[Record]) -> Result<()> {
        let needs = match &self.body {
            ModelBody::Network(_) => self.config.has_justification(),
            ModelBody::Regression(_) => self.preprocessor.has_justification,
        };
        if needs {
            if let Some(r) = records.iter().find(|r| r.justification.is_none()) {
                return Err(Error::InvalidArgument(format!(
                    "{} needs a justification, record {} has none",
                    self.config.kind, r.id
                )));
            }
        }
        Ok(())
    }

    /// Class distributions in label-space order; binary rows are `[P(fake), P(real)]`.
    pub fn predict_proba(&self, records: &[Record], batch_size: usize) -> Result<Vec<Vec<f64>>> {
        self.check_justification(records)?;
        match &self.body {
            ModelBody::Network(net) => {
                let mut out = Vec::with_capacity(records.len());
                for chunk in records.chunks(batch_size.max(1)) {
                    let ex: Vec<Example> = chunk
                        .iter()
                        .map(|r| self.preprocessor.encode(r, &self.table))
                        .collect();
                    out.extend(net.predict_proba(&ex)?);
                }
                Ok(out)
            }
            ModelBody::Regression(m) => Ok(records
                .iter()
                .map(|r| m.predict_proba(&self.preprocessor.regression_features(r, &self.table)))
                .collect()),
        }
    }

    pub fn predict(&self, records: &[Record], batch_size: usize) -> Result<Vec<usize>> {
        match &self.body {
            ModelBody::Regression(m) => {
                self.check_justification(records)?;
                Ok(records
                    .iter()
                    .map(|r| m.predict(&self.preprocessor.regression_features(r, &self.table)))
                    .collect())
            }
            ModelBody::Network(_) => Ok(self
                .predict_proba(records, batch_size)?
                .iter()
                .map(|p| decide(p))
                .collect()),
        }
    }

    /// Confusion matrix and metrics on labelled records.
    pub fn evaluate(
        &self,
        records: &[Record],
        batch_size: usize,
    ) -> Result<(ConfusionMatrix, Metrics)> {
        let space = self.label_space();
        let truth: Vec<usize> = records.iter().map(|r| space.class_of(r.label)).collect();
        let pred = self.predict(records, batch_size)?;
        let cm = ConfusionMatrix::from_predictions(&truth, &pred, space.n_classes())?;
        let m = metrics(&cm)?;
        Ok((cm, m))
    }

    /// Learned credit-score `(w, b)`, for models with a credit branch.
    pub fn credit_params(&self) -> Option<(f64, f64)> {
        match &self.body {
            ModelBody::Network(net) => net.layout.credit.map(|d| {
                (
                    net.store.get(d.weight).data()[0],
                    net.store.get(d.bias).data()[0],
                )
            }),
            ModelBody::Regression(_) => None,
        }
    }

    fn state(&self, meta_vocab_sizes: Vec<usize>) -> SavedState {
        SavedState {
            config: self.config.clone(),
            preprocessor: self.preprocessor.clone(),
            tokens: (1..self.table.rows())
                .map(|i| self.table.token(i).unwrap_or_default().to_string())
                .collect(),
            meta_vocab_sizes,
        }
    }

    /// Parameter store and metadata as written to disk.
    pub fn to_checkpoint(&self) -> Result<(ParamStore, CheckpointMeta)> {
        let (store, sizes) = match &self.body {
            ModelBody::Network(net) => (net.store.clone(), net.meta_vocab_sizes.clone()),
            ModelBody::Regression(m) => {
                let mut store = ParamStore::new();
                store.add(
                    WORDS,
                    Tensor::matrix(
                        self.table.rows(),
                        self.table.dim(),
                        self.table.matrix().to_vec(),
                    )?,
                    false,
                )?;
                for (name, t) in m.to_tensors() {
                    store.add(name, t, true)?;
                }
                (store, self.preprocessor.metadata.vocab_sizes())
            }
        };
        let meta = CheckpointMeta {
            seed: self.seed,
            config_hash: self.config.hash(),
            extra: serde_json::to_value(self.state(sizes))?,
        };
        Ok((store, meta))
    }

    pub fn from_checkpoint(store: ParamStore, meta: CheckpointMeta) -> Result<Self> {
        let state: SavedState = serde_json::from_value(meta.extra)?;
        let config = state.config;
        if config.hash() != meta.config_hash {
            return Err(Error::Checkpoint(
                "config hash does not match the stored config".into(),
            ));
        }
        let words = store
            .id_of(WORDS)
            .map(|id| store.get(id))
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor {WORDS}")))?;
        let (rows, dim) = words.dims2();
        if rows != state.tokens.len() + 1 {
            return Err(Error::Checkpoint(format!(
                "{} tokens for {rows} embedding rows",
                state.tokens.len()
            )));
        }
        let table = EmbeddingTable::from_entries(
            dim,
            state
                .tokens
                .iter()
                .enumerate()
                .map(|(i, t)| (t.clone(), words.row(i + 1).to_vec())),
        )?;
        let body = if config.kind.is_regression() {
            let tensors: Vec<(String, Tensor)> = store
                .entries()
                .iter()
                .map(|e| (e.name.clone(), e.tensor.clone()))
                .collect();
            ModelBody::Regression(RegressionModel::from_tensors(
                config.kind,
                config.label_space.n_classes(),
                &tensors,
            )?)
        } else {
            let mut net = Network::build(&config, &table, &state.meta_vocab_sizes, meta.seed)?;
            net.store.copy_values_from(&store)?;
            ModelBody::Network(net)
        };
        Ok(TrainedModel {
            config,
            preprocessor: state.preprocessor,
            table,
            body,
            seed: meta.seed,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let (store, meta) = self.to_checkpoint()?;
        save_checkpoint(path, &store, &meta)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (store, meta) = load_checkpoint(path)?;
        TrainedModel::from_checkpoint(store, meta)
    }
}

pub struct TrainOutcome {
    pub report: MetricsReport,
    pub model: TrainedModel,
}

/// Every class of the label space must occur in the training partition.
fn check_label_coverage(records: &[Record], train: &[usize], space: LabelSpace) -> Result<()> {
    let mut present = vec![false; space.n_classes()];
    for &i in train {
        present[space.class_of(records[i].label)] = true;
    }
    if let Some(c) = present.iter().position(|p| !p) {
        return Err(Error::Mismatch(format!(
            "label space {space} has class {} but the training split contains none",
            space.class_name(c)
        )));
    }
    Ok(())
}

/// Trains `config` on `split.train`, early-stops on `split.validation` and
/// reports metrics on `split.test`. Records outside the split are ignored.
pub fn train_eval(
    config: &ModelConfig,
    records: &[Record],
    split: &SplitSpec,
    train_cfg: &TrainConfig,
    table: &EmbeddingTable,
) -> Result<TrainOutcome> {
    config.validate()?;
    train_cfg.validate()?;
    split.validate_disjoint(records.len())?;
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::EmptyInput(
            "train and test partitions must be non-empty",
        ));
    }
    if table.dim() != config.embedding_dim {
        return Err(Error::Config(format!(
            "embedding table has dimension {}, config expects {}",
            table.dim(),
            config.embedding_dim
        )));
    }
    let space = config.label_space;
    check_label_coverage(records, &split.train, space)?;
    if config.has_justification() {
        let all = split
            .train
            .iter()
            .chain(&split.validation)
            .chain(&split.test);
        if let Some(&i) = all
            .into_iter()
            .find(|&&i| records[i].justification.is_none())
        {
            return Err(Error::InvalidArgument(format!(
                "{} needs justifications, record {} has none (use LIAR-Plus data)",
                config.kind, records[i].id
            )));
        }
    }

    let used: Vec<usize> = split
        .train
        .iter()
        .chain(&split.validation)
        .chain(&split.test)
        .copied()
        .collect();
    let table = restrict_table(table, used.iter().map(|&i| &records[i]));
    let pre = Preprocessor::fit(records, &split.train, &table, config)?;
    let seed = train_cfg.seed;

    let (body, history, best_epoch) = if config.kind.is_regression() {
        let x: Vec<Vec<f64>> = split
            .train
            .iter()
            .map(|&i| pre.regression_features(&records[i], &table))
            .collect();
        let y: Vec<usize> = split
            .train
            .iter()
            .map(|&i| space.class_of(records[i].label))
            .collect();
        let hyper = RegressionHyper {
            l2: config.l2,
            max_iter: train_cfg.max_iter,
            ..RegressionHyper::default()
        };
        let m = fit_regression(config.kind, &x, &y, space.n_classes(), &hyper)?;
        (ModelBody::Regression(m), LossHistory::default(), None)
    } else {
        if split.validation.is_empty() {
            return Err(Error::EmptyInput(
                "network training needs a validation partition",
            ));
        }
        let train_ex = pre.encode_all(records, &split.train, &table);
        let val_ex = pre.encode_all(records, &split.validation, &table);
        let sizes = pre.metadata.vocab_sizes();
        let net = Network::build(config, &table, &sizes, derive_seed(seed, 0))?;
        let (net, history, best) = fit_network(net, &train_ex, &val_ex, train_cfg)?;
        (ModelBody::Network(net), history, Some(best))
    };

    let model = TrainedModel {
        config: config.clone(),
        preprocessor: pre,
        table,
        body,
        seed,
    };
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    let test_recs = pick(&split.test);
    let (confusion, test) = model.evaluate(&test_recs, train_cfg.eval_batch_size)?;
    let (_, train_metrics) = model.evaluate(&pick(&split.train), train_cfg.eval_batch_size)?;
    let manifest = split.manifest(records);
    let report = MetricsReport {
        model: config.kind,
        label_space: space,
        config_hash: config.hash(),
        seed,
        split_manifest: manifest_hash(&manifest),
        test_split_hash: ids_hash(&manifest.test),
        threshold: THRESHOLD,
        n_test: test_recs.len(),
        confusion,
        test,
        train_metrics,
        loss_history: history,
        best_epoch,
        partition_sizes: [split.train.len(), split.validation.len(), split.test.len()],
        notes: length_notes(config, &model.preprocessor),
    };
    Ok(TrainOutcome { report, model })
}

/// Records where sequence lengths came from when they were not set explicitly.
fn length_notes(config: &ModelConfig, pre: &Preprocessor) -> Vec<String> {
    if config.kind.is_regression() {
        return Vec::new();
    }
    let mut notes = Vec::new();
    if config.statement_max_len.is_none() {
        notes.push(format!(
            "statement max_len {} = mean in-vocabulary token count over the training partition",
            pre.statement_max_len
        ));
    }
    if config.has_justification() && config.justification_max_len.is_none() {
        notes.push(format!(
            "justification max_len {} = mean in-vocabulary token count over the training partition",
            pre.justification_max_len
        ));
    }
    notes
}

/// Mini-batch Adam with early stopping on validation loss; returns the network
/// holding the best epoch's weights.
pub fn fit_network(
    mut net: Network,
    train: &[Example],
    validation: &[Example],
    cfg: &TrainConfig,
) -> Result<(Network, LossHistory, usize)> {
    if train.is_empty() || validation.is_empty() {
        return Err(Error::EmptyInput("training and validation examples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1));
    let adam = cfg.adam();
    let mut state = AdamState::new(&net.store);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best = net.store.clone();
    let mut history = LossHistory::default();
    let mut order: Vec<usize> = (0..train.len()).collect();

    for _epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<Example> = chunk.iter().map(|&i| train[i].clone()).collect();
            let (loss, grads) = {
                let (g, loss) = net.loss_graph(&batch, Mode::Train, &mut rng)?;
                (g.value(loss).data()[0], g.backward(loss)?)
            };
            total += loss * batch.len() as f64;
            adam_step(&mut net.store, &grads, &mut state, &adam);
        }
        history.train.push(total / train.len() as f64);
        let val = net.eval_loss(validation, cfg.eval_batch_size)?;
        history.validation.push(val);
        let decision = stopper.observe(val);
        if stopper.improved() {
            best = net.store.clone();
        }
        if let StopDecision::Stop { .. } = decision {
            break;
        }
    }
    net.store = best;
    Ok((net, history, stopper.best_epoch()))
}
