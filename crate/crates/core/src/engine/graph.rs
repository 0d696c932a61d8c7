//! Reverse-mode differentiation over a per-batch computation graph.
//!
//! A [`Graph`] borrows the model's [`ParamStore`] so parameter nodes never
//! copy their values. Nodes are appended in evaluation order, which makes
//! the reverse of creation order a valid backward schedule.

use serde::{Deserialize, Serialize};

use super::lstm::{self, LstmCache};
use super::params::{ParamId, ParamStore};
use super::tensor::{gemm, Tensor};
use crate::error::{Error, Result};

/// Probability clamp used by the cross-entropy losses.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    /// Row-wise softmax over the last dimension.
    Softmax,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// One probability column per row: the probability of target 1.
    Binary,
    Categorical,
}

enum Op {
    Input,
    Param(ParamId),
    MatMul(NodeId, NodeId),
    AddBias(NodeId, NodeId),
    Act(NodeId, Activation),
    Mul(NodeId, NodeId),
    MulConst(NodeId, Vec<f64>),
    Concat(Vec<NodeId>),
    AddBroadcast(NodeId, NodeId),
    Sum(NodeId),
    EmbeddingBag {
        table: NodeId,
        bags: Vec<Vec<usize>>,
    },
    Lstm {
        embed: NodeId,
        wx: NodeId,
        wh: NodeId,
        bias: NodeId,
        cache: Box<LstmCache>,
    },
    CrossEntropy {
        probs: NodeId,
        targets: Vec<usize>,
        kind: LossKind,
    },
}

struct Node {
    value: Option<Tensor>,
    op: Op,
    requires_grad: bool,
}

pub struct Graph<'s> {
    store: &'s ParamStore,
    nodes: Vec<Node>,
}

impl<'s> Graph<'s> {
    pub fn new(store: &'s ParamStore) -> Self {
        Graph {
            store,
            nodes: Vec::new(),
        }
    }

    pub fn store(&self) -> &ParamStore {
        self.store
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        let node = &self.nodes[id.0];
        match (&node.value, &node.op) {
            (Some(v), _) => v,
            (None, Op::Param(p)) => self.store.get(*p),
            _ => unreachable!("only parameter nodes borrow their value"),
        }
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> NodeId {
        self.nodes.push(Node {
            value: Some(value),
            op,
            requires_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn rg(&self, id: NodeId) -> bool {
        self.nodes[id.0].requires_grad
    }

    /// A constant input.
    pub fn input(&mut self, t: Tensor) -> NodeId {
        self.push(t, Op::Input, false)
    }

    /// An input whose gradient is wanted (used by tests and checks).
    pub fn variable(&mut self, t: Tensor) -> NodeId {
        self.push(t, Op::Input, true)
    }

    pub fn param(&mut self, id: ParamId) -> NodeId {
        let requires_grad = self.store.is_trainable(id);
        self.nodes.push(Node {
            value: None,
            op: Op::Param(id),
            requires_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (m, k) = self.value(a).dims2();
        let (k2, n) = self.value(b).dims2();
        if k != k2 {
            return Err(Error::shape("matmul", format!("{m}×{k} · {k2}×{n}")));
        }
        let mut out = vec![0.0; m * n];
        gemm(
            m,
            k,
            n,
            self.value(a).data(),
            false,
            self.value(b).data(),
            false,
            &mut out,
            0.0,
        );
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(Tensor::matrix(m, n, out)?, Op::MatMul(a, b), rg))
    }

    /// Adds a bias vector to every row.
    pub fn add_bias(&mut self, x: NodeId, b: NodeId) -> Result<NodeId> {
        let (m, n) = self.value(x).dims2();
        if self.value(b).len() != n {
            return Err(Error::shape(
                "add_bias",
                format!("{m}×{n} + bias of {}", self.value(b).len()),
            ));
        }
        let bias = self.value(b).data();
        let mut out = self.value(x).data().to_vec();
        for row in out.chunks_exact_mut(n.max(1)) {
            for (o, v) in row.iter_mut().zip(bias) {
                *o += v;
            }
        }
        let shape = self.value(x).shape().to_vec();
        let rg = self.rg(x) || self.rg(b);
        Ok(self.push(Tensor::new(shape, out)?, Op::AddBias(x, b), rg))
    }

    pub fn activation(&mut self, x: NodeId, act: Activation) -> NodeId {
        let out = apply_activation(self.value(x), act);
        let rg = self.rg(x);
        self.push(out, Op::Act(x, act), rg)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::shape(
                "mul",
                format!("{:?} vs {:?}", self.value(a).shape(), self.value(b).shape()),
            ));
        }
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x * y)
            .collect();
        let shape = self.value(a).shape().to_vec();
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(Tensor::new(shape, data)?, Op::Mul(a, b), rg))
    }

    /// Element-wise product with a constant mask (dropout).
    pub fn mul_const(&mut self, x: NodeId, mask: Vec<f64>) -> Result<NodeId> {
        if mask.len() != self.value(x).len() {
            return Err(Error::shape("mul_const", "mask length differs from input"));
        }
        let data = self
            .value(x)
            .data()
            .iter()
            .zip(&mask)
            .map(|(a, m)| a * m)
            .collect();
        let shape = self.value(x).shape().to_vec();
        let rg = self.rg(x);
        Ok(self.push(Tensor::new(shape, data)?, Op::MulConst(x, mask), rg))
    }

    /// Joins 2-D inputs along the last dimension.
    pub fn concat(&mut self, xs: &[NodeId]) -> Result<NodeId> {
        let first = *xs.first().ok_or(Error::EmptyInput("concat of nothing"))?;
        let rows = self.value(first).dims2().0;
        let mut widths = Vec::with_capacity(xs.len());
        for &x in xs {
            let (r, c) = self.value(x).dims2();
            if r != rows {
                return Err(Error::shape("concat", format!("row counts {rows} and {r}")));
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut out = vec![0.0; rows * total];
        let mut col = 0;
        for (&x, &w) in xs.iter().zip(&widths) {
            let v = self.value(x).data();
            for r in 0..rows {
                out[r * total + col..r * total + col + w].copy_from_slice(&v[r * w..(r + 1) * w]);
            }
            col += w;
        }
        let rg = xs.iter().any(|&x| self.rg(x));
        let shape = if self.value(first).shape().len() == 1 {
            vec![total]
        } else {
            vec![rows, total]
        };
        Ok(self.push(Tensor::new(shape, out)?, Op::Concat(xs.to_vec()), rg))
    }

    /// Adds `s` to every element of the matching row of `x`. `s` is either a
    /// single value or one value per row of `x`.
    pub fn add_broadcast(&mut self, x: NodeId, s: NodeId) -> Result<NodeId> {
        let (rows, cols) = self.value(x).dims2();
        let sl = self.value(s).len();
        if sl != 1 && sl != rows {
            return Err(Error::shape(
                "add_broadcast",
                format!("{rows}×{cols} + {sl} values"),
            ));
        }
        let sv = self.value(s).data();
        let mut out = self.value(x).data().to_vec();
        for r in 0..rows {
            let add = if sl == 1 { sv[0] } else { sv[r] };
            for v in &mut out[r * cols..(r + 1) * cols] {
                *v += add;
            }
        }
        let shape = self.value(x).shape().to_vec();
        let rg = self.rg(x) || self.rg(s);
        Ok(self.push(Tensor::new(shape, out)?, Op::AddBroadcast(x, s), rg))
    }

    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let total = self.value(x).data().iter().sum();
        let rg = self.rg(x);
        self.push(Tensor::scalar(total), Op::Sum(x), rg)
    }

    /// Mean of the selected table rows per bag; an empty bag yields zeros.
    pub fn embedding_bag(&mut self, table: NodeId, bags: Vec<Vec<usize>>) -> Result<NodeId> {
        let (rows, dim) = self.value(table).dims2();
        let t = self.value(table).data();
        let mut out = vec![0.0; bags.len() * dim];
        for (b, bag) in bags.iter().enumerate() {
            let o = &mut out[b * dim..(b + 1) * dim];
            for &i in bag {
                if i >= rows {
                    return Err(Error::shape("embedding_bag", format!("index {i} ≥ {rows}")));
                }
                for (v, x) in o.iter_mut().zip(&t[i * dim..(i + 1) * dim]) {
                    *v += x;
                }
            }
            if !bag.is_empty() {
                let k = bag.len() as f64;
                o.iter_mut().for_each(|v| *v /= k);
            }
        }
        let rg = self.rg(table);
        let value = Tensor::matrix(bags.len(), dim, out)?;
        Ok(self.push(value, Op::EmbeddingBag { table, bags }, rg))
    }

    /// Runs an LSTM over each sequence of embedding-row indices and returns
    /// the final hidden states (`n × hidden`). Empty sequences give zeros.
    pub fn lstm(
        &mut self,
        embed: NodeId,
        wx: NodeId,
        wh: NodeId,
        bias: NodeId,
        seqs: &[Vec<usize>],
    ) -> Result<NodeId> {
        let (rows, d) = self.value(embed).dims2();
        let (wxr, g4) = self.value(wx).dims2();
        let h = g4 / 4;
        if wxr != d || g4 % 4 != 0 {
            return Err(Error::shape(
                "lstm",
                format!("input weight {wxr}×{g4} for input dim {d}"),
            ));
        }
        if self.value(wh).dims2() != (h, g4) || self.value(bias).len() != g4 {
            return Err(Error::shape("lstm", "recurrent weight or bias size"));
        }
        if let Some(bad) = seqs.iter().flatten().find(|&&i| i >= rows) {
            return Err(Error::shape("lstm", format!("token index {bad} ≥ {rows}")));
        }
        let (out, cache) = lstm::forward(
            self.value(embed).data(),
            d,
            self.value(wx).data(),
            self.value(wh).data(),
            self.value(bias).data(),
            h,
            seqs,
        );
        let rg = [embed, wx, wh, bias].iter().any(|&n| self.rg(n));
        let value = Tensor::matrix(seqs.len(), h, out)?;
        Ok(self.push(
            value,
            Op::Lstm {
                embed,
                wx,
                wh,
                bias,
                cache: Box::new(cache),
            },
            rg,
        ))
    }

    /// Mean cross-entropy over rows, probabilities clamped to `[ε, 1 − ε]`.
    pub fn cross_entropy(
        &mut self,
        probs: NodeId,
        targets: &[usize],
        kind: LossKind,
    ) -> Result<NodeId> {
        let loss = cross_entropy(self.value(probs), targets, kind)?;
        let rg = self.rg(probs);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::CrossEntropy {
                probs,
                targets: targets.to_vec(),
                kind,
            },
            rg,
        ))
    }

    /// Back-propagates from a one-element node.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        if loss.0 >= self.nodes.len() {
            return Err(Error::NoForward("loss node is not part of this graph"));
        }
        if self.value(loss).len() != 1 {
            return Err(Error::shape(
                "backward",
                "loss must have exactly one element",
            ));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::full(self.value(loss).shape(), 1.0));

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.requires_grad {
                grads[i] = Some(g);
                continue;
            }
            let out = self.value(NodeId(i));
            match &node.op {
                Op::Input | Op::Param(_) => {}
                Op::MatMul(a, b) => {
                    let (m, k) = self.value(*a).dims2();
                    let n = self.value(*b).dims2().1;
                    if self.rg(*a) {
                        let mut da = vec![0.0; m * k];
                        gemm(
                            m,
                            n,
                            k,
                            g.data(),
                            false,
                            self.value(*b).data(),
                            true,
                            &mut da,
                            0.0,
                        );
                        accumulate(&mut grads, *a, self.value(*a).shape(), da);
                    }
                    if self.rg(*b) {
                        let mut db = vec![0.0; k * n];
                        gemm(
                            k,
                            m,
                            n,
                            self.value(*a).data(),
                            true,
                            g.data(),
                            false,
                            &mut db,
                            0.0,
                        );
                        accumulate(&mut grads, *b, self.value(*b).shape(), db);
                    }
                }
                Op::AddBias(x, b) => {
                    if self.rg(*b) {
                        let n = self.value(*b).len();
                        let mut db = vec![0.0; n];
                        for row in g.data().chunks_exact(n.max(1)) {
                            for (d, v) in db.iter_mut().zip(row) {
                                *d += v;
                            }
                        }
                        accumulate(&mut grads, *b, self.value(*b).shape(), db);
                    }
                    if self.rg(*x) {
                        accumulate(&mut grads, *x, self.value(*x).shape(), g.data().to_vec());
                    }
                }
                Op::Act(x, act) => {
                    let dx = activation_backward(out, g.data(), *act);
                    accumulate(&mut grads, *x, self.value(*x).shape(), dx);
                }
                Op::Mul(a, b) => {
                    for (src, other) in [(*a, *b), (*b, *a)] {
                        if self.rg(src) {
                            let d = g
                                .data()
                                .iter()
                                .zip(self.value(other).data())
                                .map(|(g, o)| g * o)
                                .collect();
                            accumulate(&mut grads, src, self.value(src).shape(), d);
                        }
                    }
                }
                Op::MulConst(x, mask) => {
                    let d = g.data().iter().zip(mask).map(|(g, m)| g * m).collect();
                    accumulate(&mut grads, *x, self.value(*x).shape(), d);
                }
                Op::Concat(xs) => {
                    let (rows, total) = out.dims2();
                    let mut col = 0;
                    for &x in xs {
                        let w = self.value(x).dims2().1;
                        if self.rg(x) {
                            let mut d = vec![0.0; rows * w];
                            for r in 0..rows {
                                d[r * w..(r + 1) * w].copy_from_slice(
                                    &g.data()[r * total + col..r * total + col + w],
                                );
                            }
                            accumulate(&mut grads, x, self.value(x).shape(), d);
                        }
                        col += w;
                    }
                }
                Op::AddBroadcast(x, s) => {
                    if self.rg(*x) {
                        accumulate(&mut grads, *x, self.value(*x).shape(), g.data().to_vec());
                    }
                    if self.rg(*s) {
                        let (rows, cols) = out.dims2();
                        let sl = self.value(*s).len();
                        let mut ds = vec![0.0; sl];
                        for r in 0..rows {
                            let row_sum: f64 = g.data()[r * cols..(r + 1) * cols].iter().sum();
                            ds[if sl == 1 { 0 } else { r }] += row_sum;
                        }
                        accumulate(&mut grads, *s, self.value(*s).shape(), ds);
                    }
                }
                Op::Sum(x) => {
                    let v = g.data()[0];
                    accumulate(
                        &mut grads,
                        *x,
                        self.value(*x).shape(),
                        vec![v; self.value(*x).len()],
                    );
                }
                Op::EmbeddingBag { table, bags } => {
                    let (rows, dim) = self.value(*table).dims2();
                    let mut d = vec![0.0; rows * dim];
                    for (b, bag) in bags.iter().enumerate() {
                        if bag.is_empty() {
                            continue;
                        }
                        let k = bag.len() as f64;
                        let gb = &g.data()[b * dim..(b + 1) * dim];
                        for &i in bag {
                            for (dv, gv) in d[i * dim..(i + 1) * dim].iter_mut().zip(gb) {
                                *dv += gv / k;
                            }
                        }
                    }
                    accumulate(&mut grads, *table, self.value(*table).shape(), d);
                }
                Op::Lstm {
                    embed,
                    wx,
                    wh,
                    bias,
                    cache,
                } => {
                    let need_x = self.rg(*embed);
                    let lg = lstm::backward(
                        cache,
                        g.data(),
                        self.value(*wx).data(),
                        self.value(*wh).data(),
                        need_x,
                    );
                    if self.rg(*wx) {
                        accumulate(&mut grads, *wx, self.value(*wx).shape(), lg.wx);
                    }
                    if self.rg(*wh) {
                        accumulate(&mut grads, *wh, self.value(*wh).shape(), lg.wh);
                    }
                    if self.rg(*bias) {
                        accumulate(&mut grads, *bias, self.value(*bias).shape(), lg.bias);
                    }
                    if let Some(dx) = lg.x {
                        let (rows, d) = self.value(*embed).dims2();
                        let mut de = vec![0.0; rows * d];
                        for (k, &tok) in cache.tokens.iter().enumerate() {
                            for (a, b) in de[tok * d..(tok + 1) * d]
                                .iter_mut()
                                .zip(&dx[k * d..(k + 1) * d])
                            {
                                *a += b;
                            }
                        }
                        accumulate(&mut grads, *embed, self.value(*embed).shape(), de);
                    }
                }
                Op::CrossEntropy {
                    probs,
                    targets,
                    kind,
                } => {
                    let scale = g.data()[0];
                    let p = self.value(*probs);
                    let (n, c) = p.dims2();
                    let mut d = vec![0.0; n * c];
                    let inv_n = scale / n as f64;
                    for (r, &t) in targets.iter().enumerate() {
                        match (kind, c) {
                            (LossKind::Binary, 1) => {
                                let q = p.data()[r];
                                if q > PROB_EPS && q < 1.0 - PROB_EPS {
                                    d[r] = if t == 1 { -1.0 / q } else { 1.0 / (1.0 - q) } * inv_n;
                                }
                            }
                            _ => {
                                let q = p.data()[r * c + t];
                                if q > PROB_EPS && q < 1.0 - PROB_EPS {
                                    d[r * c + t] = -inv_n / q;
                                }
                            }
                        }
                    }
                    accumulate(&mut grads, *probs, p.shape(), d);
                }
            }
            grads[i] = Some(g);
        }

        let mut by_param: Vec<Option<Tensor>> = (0..self.store.len()).map(|_| None).collect();
        for (i, node) in self.nodes.iter().enumerate() {
            if let (Op::Param(p), Some(g)) = (&node.op, &grads[i]) {
                if node.requires_grad {
                    match &mut by_param[p.0] {
                        Some(acc) => acc.add_assign(g),
                        slot => *slot = Some(g.clone()),
                    }
                }
            }
        }
        Ok(Gradients {
            by_param,
            by_node: grads,
        })
    }
}

fn accumulate(grads: &mut [Option<Tensor>], id: NodeId, shape: &[usize], d: Vec<f64>) {
    match &mut grads[id.0] {
        Some(acc) => {
            for (a, b) in acc.data_mut().iter_mut().zip(&d) {
                *a += b;
            }
        }
        slot => *slot = Some(Tensor::new(shape.to_vec(), d).expect("gradient shape")),
    }
}

/// Gradients of one backward pass.
pub struct Gradients {
    by_param: Vec<Option<Tensor>>,
    by_node: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient for a trainable parameter that took part in the forward pass.
    pub fn param(&self, id: ParamId) -> Option<&Tensor> {
        self.by_param.get(id.0).and_then(Option::as_ref)
    }

    pub fn node(&self, id: NodeId) -> Option<&Tensor> {
        self.by_node.get(id.0).and_then(Option::as_ref)
    }

    pub fn params(&self) -> impl Iterator<Item = (ParamId, &Tensor)> {
        self.by_param
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.as_ref().map(|g| (ParamId(i), g)))
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn apply_activation(x: &Tensor, act: Activation) -> Tensor {
    match act {
        Activation::Relu => x.map(|v| v.max(0.0)),
        Activation::Tanh => x.map(f64::tanh),
        Activation::Sigmoid => x.map(sigmoid),
        Activation::None => x.clone(),
        Activation::Softmax => {
            let (_, c) = x.dims2();
            let mut out = x.data().to_vec();
            for row in out.chunks_exact_mut(c.max(1)) {
                let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut z = 0.0;
                for v in row.iter_mut() {
                    *v = (*v - m).exp();
                    z += *v;
                }
                row.iter_mut().for_each(|v| *v /= z);
            }
            Tensor::new(x.shape().to_vec(), out).expect("same shape")
        }
    }
}

fn activation_backward(out: &Tensor, g: &[f64], act: Activation) -> Vec<f64> {
    let y = out.data();
    match act {
        Activation::Relu => y
            .iter()
            .zip(g)
            .map(|(y, g)| if *y > 0.0 { *g } else { 0.0 })
            .collect(),
        Activation::Tanh => y.iter().zip(g).map(|(y, g)| g * (1.0 - y * y)).collect(),
        Activation::Sigmoid => y.iter().zip(g).map(|(y, g)| g * y * (1.0 - y)).collect(),
        Activation::None => g.to_vec(),
        Activation::Softmax => {
            let (_, c) = out.dims2();
            let mut d = vec![0.0; y.len()];
            for ((dr, yr), gr) in d
                .chunks_exact_mut(c)
                .zip(y.chunks_exact(c))
                .zip(g.chunks_exact(c))
            {
                let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                for ((dv, yv), gv) in dr.iter_mut().zip(yr).zip(gr) {
                    *dv = yv * (gv - dot);
                }
            }
            d
        }
    }
}

/// Mean negative log-likelihood of `targets` under `probs`.
///
/// With [`LossKind::Binary`] and a single column, the column is the
/// probability of target `1`; otherwise each row is a distribution over classes.
pub fn cross_entropy(probs: &Tensor, targets: &[usize], kind: LossKind) -> Result<f64> {
    let (n, c) = probs.dims2();
    if targets.len() != n {
        return Err(Error::shape(
            "cross_entropy",
            format!("{n} rows, {} targets", targets.len()),
        ));
    }
    if n == 0 {
        return Err(Error::EmptyInput("cross-entropy over an empty batch"));
    }
    let classes = if kind == LossKind::Binary && c == 1 {
        2
    } else {
        c
    };
    let clamp = |p: f64| p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    let mut total = 0.0;
    for (r, &t) in targets.iter().enumerate() {
        if t >= classes {
            return Err(Error::InvalidArgument(format!(
                "target {t} out of range for {classes} classes"
            )));
        }
        let p = if c == 1 {
            let q = probs.data()[r];
            if t == 1 {
                q
            } else {
                1.0 - q
            }
        } else {
            probs.data()[r * c + t]
        };
        total -= clamp(p).ln();
    }
    Ok(total / n as f64)
}
