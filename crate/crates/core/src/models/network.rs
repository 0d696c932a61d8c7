//! Branch networks: statement (S), metadata (M), justification (J) and credit (C).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::features::{Example, META_FIELDS};
use crate::corpus::LabelSpace;
use crate::credit::history_ratio;
use crate::engine::{
    dropout_node, uniform, Activation, Dense, Graph, LossKind, Lstm, Mode, NodeId, ParamId,
    ParamStore, Tensor,
};
use crate::error::{Error, Result};
use crate::text::EmbeddingTable;

/// Number of standardized count features appended to the metadata input.
pub const META_COUNTS: usize = 5;

/// Recurrent encoder: LSTM followed by dropout and a relu dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoder {
    pub lstm: Lstm,
    pub dense: Dense,
}

/// Parameter layout of a built network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub word_embedding: ParamId,
    pub statement: Encoder,
    pub justification: Option<Encoder>,
    pub meta_embeddings: Vec<ParamId>,
    pub meta_dense: Dense,
    pub credit: Option<Dense>,
    pub head: Dense,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub config: ModelConfig,
    pub layout: Layout,
    pub store: ParamStore,
    pub meta_vocab_sizes: Vec<usize>,
}

/// Node handles of one forward pass.
#[derive(Debug, Clone, Copy)]
pub struct ForwardNodes {
    pub statement: NodeId,
    pub justification: Option<NodeId>,
    pub metadata: NodeId,
    pub credit: Option<NodeId>,
    /// Concatenation of the branches plus the credit shift; the head's input.
    pub fused: NodeId,
    pub probs: NodeId,
}

/// Values of one forward pass, rows in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub statement: Tensor,
    pub justification: Option<Tensor>,
    pub fused: Tensor,
    /// `n × 1` of P(fake) for binary heads, `n × 6` for six-way heads.
    pub probs: Tensor,
}

impl Network {
    pub fn build(
        config: &ModelConfig,
        table: &EmbeddingTable,
        meta_vocab_sizes: &[usize],
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if config.kind.is_regression() {
            return Err(Error::Config(format!(
                "{} is not a network model",
                config.kind
            )));
        }
        if table.dim() != config.embedding_dim {
            return Err(Error::Config(format!(
                "embedding table has dimension {}, config expects {}",
                table.dim(),
                config.embedding_dim
            )));
        }
        if meta_vocab_sizes.len() != META_FIELDS.len() || meta_vocab_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "expected {} non-empty metadata vocabularies, got {:?}",
                META_FIELDS.len(),
                meta_vocab_sizes
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let word_embedding = store.add(
            "embedding.words",
            Tensor::matrix(table.rows(), table.dim(), table.matrix().to_vec())?,
            config.trainable_embeddings,
        )?;

        let encoder = |store: &mut ParamStore,
                       name: &str,
                       width: usize,
                       rng: &mut ChaCha8Rng|
         -> Result<Encoder> {
            let lstm = Lstm::new(
                store,
                &format!("{name}.lstm"),
                config.embedding_dim,
                config.lstm_hidden,
                rng,
            )?;
            let dense = Dense::new(
                store,
                &format!("{name}.dense"),
                config.lstm_hidden,
                width,
                rng,
            )?;
            Ok(Encoder { lstm, dense })
        };
        let enc_name = if config.shared_encoder {
            "shared"
        } else {
            "statement"
        };
        let statement = encoder(&mut store, enc_name, config.statement_width, &mut rng)?;
        let justification = if !config.has_justification() {
            None
        } else if config.shared_encoder {
            Some(statement)
        } else {
            Some(encoder(
                &mut store,
                "justification",
                config.justification_width,
                &mut rng,
            )?)
        };

        let md = config.metadata_embedding_dim;
        let mut meta_embeddings = Vec::with_capacity(META_FIELDS.len());
        for (field, &size) in META_FIELDS.iter().zip(meta_vocab_sizes) {
            let t = uniform(&mut rng, -0.05, 0.05, &[size, md]);
            meta_embeddings.push(store.add(format!("metadata.{field}.embedding"), t, true)?);
        }
        let meta_in = META_FIELDS.len() * md + META_COUNTS;
        let meta_dense = Dense::new(
            &mut store,
            "metadata.dense",
            meta_in,
            config.metadata_width,
            &mut rng,
        )?;

        let credit = if config.has_credit() {
            let w = store.add("credit.weight", Tensor::matrix(1, 1, vec![1.0])?, true)?;
            let b = store.add("credit.bias", Tensor::vector(vec![0.0]), true)?;
            Some(Dense {
                weight: w,
                bias: b,
                input: 1,
                output: config.credit_width,
            })
        } else {
            None
        };

        let head_out = match config.label_space {
            LabelSpace::Binary => 1,
            LabelSpace::Six => 6,
        };
        let head = Dense::new(
            &mut store,
            "head",
            Self::fused_width(config),
            head_out,
            &mut rng,
        )?;

        Ok(Network {
            config: config.clone(),
            layout: Layout {
                word_embedding,
                statement,
                justification,
                meta_embeddings,
                meta_dense,
                credit,
                head,
            },
            store,
            meta_vocab_sizes: meta_vocab_sizes.to_vec(),
        })
    }

    /// Width of the concatenated branch outputs.
    pub fn fused_width(config: &ModelConfig) -> usize {
        config.statement_width
            + config.metadata_width
            + if config.has_justification() {
                config.justification_width
            } else {
                0
            }
    }

    pub fn trainable_param_count(&self) -> usize {
        self.store.trainable_count()
    }

    fn loss_kind(&self) -> LossKind {
        match self.config.label_space {
            LabelSpace::Binary => LossKind::Binary,
            LabelSpace::Six => LossKind::Categorical,
        }
    }

    /// Loss targets: binary heads model P(fake), and fake is class 0.
    pub fn loss_targets(&self, examples: &[Example]) -> Vec<usize> {
        match self.config.label_space {
            LabelSpace::Binary => examples.iter().map(|e| usize::from(e.class == 0)).collect(),
            LabelSpace::Six => examples.iter().map(|e| e.class).collect(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn encode_branch(
        &self,
        g: &mut Graph<'_>,
        enc: &Encoder,
        embed: NodeId,
        seqs: &[Vec<usize>],
        rate: f64,
        mode: Mode,
        rng: &mut impl Rng,
    ) -> Result<NodeId> {
        let h = enc.lstm.forward(g, embed, seqs)?;
        let h = dropout_node(g, h, rate, mode, rng)?;
        enc.dense.forward(g, h, Activation::Relu)
    }

    /// Records the forward pass of a batch on `g`.
    pub fn forward_graph(
        &self,
        g: &mut Graph<'_>,
        batch: &[Example],
        mode: Mode,
        rng: &mut impl Rng,
    ) -> Result<ForwardNodes> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("empty batch"));
        }
        let cfg = &self.config;
        let l = &self.layout;
        let embed = g.param(l.word_embedding);

        let s_seqs: Vec<Vec<usize>> = batch
            .iter()
            .map(|e| e.statement.tokens().to_vec())
            .collect();
        let statement = self.encode_branch(
            g,
            &l.statement,
            embed,
            &s_seqs,
            cfg.statement_dropout,
            mode,
            rng,
        )?;

        let justification = match &l.justification {
            Some(enc) => {
                let mut j_seqs = Vec::with_capacity(batch.len());
                for (i, e) in batch.iter().enumerate() {
                    let j = e.justification.as_ref().ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "{} needs a justification (batch row {i})",
                            cfg.kind
                        ))
                    })?;
                    j_seqs.push(j.tokens().to_vec());
                }
                Some(self.encode_branch(
                    g,
                    enc,
                    embed,
                    &j_seqs,
                    cfg.justification_dropout,
                    mode,
                    rng,
                )?)
            }
            None => None,
        };

        let mut meta_parts = Vec::with_capacity(META_FIELDS.len() + 1);
        for (f, &pid) in l.meta_embeddings.iter().enumerate() {
            let table = g.param(pid);
            let bags = batch.iter().map(|e| e.meta.categories[f].clone()).collect();
            meta_parts.push(g.embedding_bag(table, bags)?);
        }
        let counts: Vec<f64> = batch.iter().flat_map(|e| e.meta.counts).collect();
        meta_parts.push(g.input(Tensor::matrix(batch.len(), META_COUNTS, counts)?));
        let meta_in = g.concat(&meta_parts)?;
        let metadata = l.meta_dense.forward(g, meta_in, Activation::Relu)?;

        let mut branches = vec![statement, metadata];
        branches.extend(justification);
        let mut fused = g.concat(&branches)?;

        let credit = match &l.credit {
            Some(dense) => {
                let ratios: Vec<f64> = batch.iter().map(|e| history_ratio(&e.counts)).collect();
                let x = g.input(Tensor::matrix(batch.len(), 1, ratios)?);
                let c = dense.forward(g, x, Activation::Tanh)?;
                fused = g.add_broadcast(fused, c)?;
                Some(c)
            }
            None => None,
        };

        let head_act = match cfg.label_space {
            LabelSpace::Binary => Activation::Sigmoid,
            LabelSpace::Six => Activation::Softmax,
        };
        let probs = l.head.forward(g, fused, head_act)?;
        Ok(ForwardNodes {
            statement,
            justification,
            metadata,
            credit,
            fused,
            probs,
        })
    }

    /// Mean loss of a batch and its graph, ready for `backward`.
    pub fn loss_graph<'s>(
        &'s self,
        batch: &[Example],
        mode: Mode,
        rng: &mut impl Rng,
    ) -> Result<(Graph<'s>, NodeId)> {
        let mut g = Graph::new(&self.store);
        let nodes = self.forward_graph(&mut g, batch, mode, rng)?;
        let targets = self.loss_targets(batch);
        let loss = g.cross_entropy(nodes.probs, &targets, self.loss_kind())?;
        Ok((g, loss))
    }

    /// Deterministic inference pass (dropout off).
    pub fn forward(&self, batch: &[Example]) -> Result<ForwardOutput> {
        let mut g = Graph::new(&self.store);
        // eval mode never draws from the generator
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = self.forward_graph(&mut g, batch, Mode::Eval, &mut rng)?;
        Ok(ForwardOutput {
            statement: g.value(n.statement).clone(),
            justification: n.justification.map(|j| g.value(j).clone()),
            fused: g.value(n.fused).clone(),
            probs: g.value(n.probs).clone(),
        })
    }

    /// Class distributions in label-space order (binary: `[P(fake), P(real)]`).
    pub fn predict_proba(&self, batch: &[Example]) -> Result<Vec<Vec<f64>>> {
        let out = self.forward(batch)?;
        let (rows, _) = out.probs.dims2();
        Ok((0..rows)
            .map(|r| {
                let p = out.probs.row(r);
                match self.config.label_space {
                    LabelSpace::Binary => vec![p[0], 1.0 - p[0]],
                    LabelSpace::Six => p.to_vec(),
                }
            })
            .collect())
    }

    /// Mean evaluation loss over `examples`, in batches of `batch_size`.
    pub fn eval_loss(&self, examples: &[Example], batch_size: usize) -> Result<f64> {
        if examples.is_empty() {
            return Err(Error::EmptyInput("no evaluation examples"));
        }
        let mut total = 0.0;
        for chunk in examples.chunks(batch_size.max(1)) {
            let out = self.forward(chunk)?;
            let l = crate::engine::cross_entropy(
                &out.probs,
                &self.loss_targets(chunk),
                self.loss_kind(),
            )?;
            total += l * chunk.len() as f64;
        }
        Ok(total / examples.len() as f64)
    }
}

/// Predicted class from a distribution; binary uses `P(fake) ≥ 0.5 → fake`.
pub fn decide(probs: &[f64]) -> usize {
    if probs.len() == 2 {
        usize::from(probs[0] < 0.5)
    } else {
        super::regression::argmax(probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CreditCounts;
    use crate::models::config::ModelKind;
    use crate::models::features::MetaFeatures;
    use crate::text::EncodedSequence;

    fn table() -> EmbeddingTable {
        EmbeddingTable::from_entries(
            4,
            (0..6).map(|i| {
                (
                    format!("w{i}"),
                    (0..4).map(|k| ((i * 4 + k) as f64 * 0.37).sin()).collect(),
                )
            }),
        )
        .unwrap()
    }

    fn config(kind: ModelKind, space: LabelSpace) -> ModelConfig {
        let mut c = ModelConfig::new(kind, space);
        c.embedding_dim = 4;
        c.lstm_hidden = 5;
        c
    }

    fn example(tokens: &[usize], just: Option<&[usize]>, pfc: f64) -> Example {
        let seq = |t: &[usize]| EncodedSequence {
            indices: t.to_vec(),
            true_length: t.len(),
        };
        Example {
            statement: seq(tokens),
            justification: just.map(seq),
            meta: MetaFeatures {
                categories: vec![vec![1, 2], vec![1], vec![0], vec![2], vec![1], vec![0]],
                counts: [0.1, -0.2, 0.3, 0.0, pfc],
            },
            counts: CreditCounts::new(1.0, 2.0, 0.0, 1.0, pfc),
            class: 0,
        }
    }

    const SIZES: [usize; 6] = [3, 3, 2, 3, 2, 2];

    fn expected_params(c: &ModelConfig) -> usize {
        let (d, h) = (c.embedding_dim, c.lstm_hidden);
        let enc = |w: usize| 4 * h * (d + h + 1) + h * w + w;
        let mut total = enc(c.statement_width);
        if c.has_justification() && !c.shared_encoder {
            total += enc(c.justification_width);
        }
        let m_in = 6 * c.metadata_embedding_dim + 5;
        total += SIZES.iter().sum::<usize>() * c.metadata_embedding_dim;
        total += m_in * c.metadata_width + c.metadata_width;
        if c.has_credit() {
            total += 2;
        }
        let k = if c.label_space == LabelSpace::Binary {
            1
        } else {
            6
        };
        let fused = c.statement_width
            + c.metadata_width
            + if c.has_justification() {
                c.justification_width
            } else {
                0
            };
        total + fused * k + k
    }

    #[test]
    fn parameter_audit() {
        for kind in [
            ModelKind::Seq,
            ModelKind::SeqJust,
            ModelKind::Enhanced,
            ModelKind::SiameseShared,
        ] {
            for space in [LabelSpace::Binary, LabelSpace::Six] {
                let c = config(kind, space);
                let n = Network::build(&c, &table(), &SIZES, 1).unwrap();
                assert_eq!(
                    n.trainable_param_count(),
                    expected_params(&c),
                    "{kind} {space}"
                );
            }
        }
    }

    #[test]
    fn enhanced_binary_widths() {
        let n = Network::build(
            &config(ModelKind::Enhanced, LabelSpace::Binary),
            &table(),
            &SIZES,
            1,
        )
        .unwrap();
        assert_eq!(n.layout.head.input, 128);
        assert_eq!(n.layout.head.output, 1);
        let seq = Network::build(
            &config(ModelKind::Seq, LabelSpace::Binary),
            &table(),
            &SIZES,
            1,
        )
        .unwrap();
        assert!(seq.layout.justification.is_none() && seq.layout.credit.is_none());
        assert_eq!(seq.layout.head.input, 96);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut c = config(ModelKind::Seq, LabelSpace::Binary);
        c.embedding_dim = 7;
        assert!(matches!(
            Network::build(&c, &table(), &SIZES, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn output_contracts() {
        let batch = vec![
            example(&[1, 2, 3], Some(&[4, 5]), 2.0),
            example(&[], Some(&[1]), 0.0),
        ];
        let six = Network::build(
            &config(ModelKind::Enhanced, LabelSpace::Six),
            &table(),
            &SIZES,
            3,
        )
        .unwrap();
        for p in six.predict_proba(&batch).unwrap() {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let mut bin = Network::build(
            &config(ModelKind::Enhanced, LabelSpace::Binary),
            &table(),
            &SIZES,
            3,
        )
        .unwrap();
        for p in bin.predict_proba(&batch).unwrap() {
            assert!((0.0..=1.0).contains(&p[0]));
        }
        let w = bin.layout.head.weight;
        bin.store
            .get_mut(w)
            .data_mut()
            .iter_mut()
            .for_each(|v| *v = 0.0);
        for p in bin.predict_proba(&batch).unwrap() {
            assert_eq!(p[0], 0.5);
        }
    }

    #[test]
    fn missing_justification_is_error() {
        let n = Network::build(
            &config(ModelKind::SeqJust, LabelSpace::Binary),
            &table(),
            &SIZES,
            1,
        )
        .unwrap();
        assert!(matches!(
            n.forward(&[example(&[1], None, 0.0)]),
            Err(Error::InvalidArgument(_))
        ));
        let s = Network::build(
            &config(ModelKind::Seq, LabelSpace::Binary),
            &table(),
            &SIZES,
            1,
        )
        .unwrap();
        assert!(s.forward(&[example(&[1], None, 0.0)]).is_ok());
    }

    #[test]
    fn shared_encoder_outputs_match() {
        let n = Network::build(
            &config(ModelKind::SiameseShared, LabelSpace::Binary),
            &table(),
            &SIZES,
            9,
        )
        .unwrap();
        let out = n
            .forward(&[example(&[1, 4, 2], Some(&[1, 4, 2]), 0.0)])
            .unwrap();
        assert_eq!(out.statement, out.justification.unwrap());
    }

    #[test]
    fn credit_shifts_fused_uniformly() {
        let n = Network::build(
            &config(ModelKind::Enhanced, LabelSpace::Binary),
            &table(),
            &SIZES,
            5,
        )
        .unwrap();
        let mut lo = example(&[1, 2], Some(&[3]), 0.0);
        let base = n.forward(std::slice::from_ref(&lo)).unwrap().fused;
        lo.counts.pfc = 6.0;
        let hi = n.forward(&[lo]).unwrap().fused;
        let diffs: Vec<f64> = hi
            .data()
            .iter()
            .zip(base.data())
            .map(|(a, b)| a - b)
            .collect();
        assert!(diffs[0] > 0.0);
        assert!(diffs.iter().all(|d| (d - diffs[0]).abs() < 1e-12));
    }
}
