//! Layer parameter bundles and their forward passes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::{Activation, Graph, NodeId};
use super::params::{glorot_uniform, ParamId, ParamStore};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Fully connected layer: `activation(x · W + b)` with `W` of shape `input × output`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: ParamId,
    pub bias: ParamId,
    pub input: usize,
    pub output: usize,
}

impl Dense {
    /// Glorot-uniform weights, zero bias.
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        input: usize,
        output: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let weight = store.add(
            format!("{name}.weight"),
            glorot_uniform(rng, input, output, &[input, output]),
            true,
        )?;
        let bias = store.add(format!("{name}.bias"), Tensor::zeros(&[output]), true)?;
        Ok(Dense {
            weight,
            bias,
            input,
            output,
        })
    }

    pub fn param_count(&self) -> usize {
        self.input * self.output + self.output
    }

    pub fn forward(&self, g: &mut Graph<'_>, x: NodeId, act: Activation) -> Result<NodeId> {
        let w = g.param(self.weight);
        let b = g.param(self.bias);
        let xw = g.matmul(x, w)?;
        let z = g.add_bias(xw, b)?;
        Ok(g.activation(z, act))
    }
}

/// Standard LSTM layer; gate order is input, forget, candidate, output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lstm {
    pub input_weight: ParamId,
    pub recurrent_weight: ParamId,
    pub bias: ParamId,
    pub input_dim: usize,
    pub hidden: usize,
}

impl Lstm {
    /// Glorot-uniform kernels; bias zero except the forget gate, which starts at 1.
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        input_dim: usize,
        hidden: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let g4 = 4 * hidden;
        let input_weight = store.add(
            format!("{name}.input_weight"),
            glorot_uniform(rng, input_dim, g4, &[input_dim, g4]),
            true,
        )?;
        let recurrent_weight = store.add(
            format!("{name}.recurrent_weight"),
            glorot_uniform(rng, hidden, g4, &[hidden, g4]),
            true,
        )?;
        let mut b = vec![0.0; g4];
        b[hidden..2 * hidden].iter_mut().for_each(|v| *v = 1.0);
        let bias = store.add(format!("{name}.bias"), Tensor::vector(b), true)?;
        Ok(Lstm {
            input_weight,
            recurrent_weight,
            bias,
            input_dim,
            hidden,
        })
    }

    pub fn param_count(&self) -> usize {
        4 * self.hidden * (self.input_dim + self.hidden + 1)
    }

    /// Final hidden state per sequence; `seqs` hold row indices into `embed`.
    pub fn forward(&self, g: &mut Graph<'_>, embed: NodeId, seqs: &[Vec<usize>]) -> Result<NodeId> {
        let wx = g.param(self.input_weight);
        let wh = g.param(self.recurrent_weight);
        let b = g.param(self.bias);
        g.lstm(embed, wx, wh, b, seqs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Train,
    Eval,
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise `1 / (1 - rate)`.
pub fn dropout_mask(len: usize, rate: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!(
            "dropout rate {rate} must be in [0, 1)"
        )));
    }
    let keep = 1.0 / (1.0 - rate);
    Ok((0..len)
        .map(|_| {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                keep
            }
        })
        .collect())
}

/// Dropout node; identity in eval mode or at rate 0.
pub fn dropout_node(
    g: &mut Graph<'_>,
    x: NodeId,
    rate: f64,
    mode: Mode,
    rng: &mut impl Rng,
) -> Result<NodeId> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!(
            "dropout rate {rate} must be in [0, 1)"
        )));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok(x);
    }
    let mask = dropout_mask(g.value(x).len(), rate, rng)?;
    g.mul_const(x, mask)
}

pub fn dropout(x: &Tensor, rate: f64, mode: Mode, rng: &mut impl Rng) -> Result<Tensor> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!(
            "dropout rate {rate} must be in [0, 1)"
        )));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok(x.clone());
    }
    let mask = dropout_mask(x.len(), rate, rng)?;
    let data = x.data().iter().zip(&mask).map(|(a, m)| a * m).collect();
    Tensor::new(x.shape().to_vec(), data)
}

pub fn dense_forward(
    x: &Tensor,
    store: &ParamStore,
    layer: &Dense,
    act: Activation,
) -> Result<Tensor> {
    let mut g = Graph::new(store);
    let xi = g.input(x.clone());
    let y = layer.forward(&mut g, xi, act)?;
    Ok(g.value(y).clone())
}

/// Final hidden state for one sequence of table rows (`true_length` prefix only).
pub fn lstm_forward(
    tokens: &[usize],
    embed: &Tensor,
    store: &ParamStore,
    layer: &Lstm,
) -> Result<Tensor> {
    if embed.dims2().1 != layer.input_dim {
        return Err(Error::shape(
            "lstm_forward",
            format!(
                "embedding dim {} vs layer input {}",
                embed.dims2().1,
                layer.input_dim
            ),
        ));
    }
    let mut g = Graph::new(store);
    let e = g.input(embed.clone());
    let y = layer.forward(&mut g, e, &[tokens.to_vec()])?;
    Ok(Tensor::vector(g.value(y).data().to_vec()))
}

pub fn concat(xs: &[Tensor]) -> Result<Tensor> {
    let store = ParamStore::new();
    let mut g = Graph::new(&store);
    let ids: Vec<_> = xs.iter().map(|x| g.input(x.clone())).collect();
    let y = g.concat(&ids)?;
    Ok(g.value(y).clone())
}

pub fn add_broadcast(x: &Tensor, s: &Tensor) -> Result<Tensor> {
    let store = ParamStore::new();
    let mut g = Graph::new(&store);
    let xi = g.input(x.clone());
    let si = g.input(s.clone());
    let y = g.add_broadcast(xi, si)?;
    Ok(g.value(y).clone())
}
