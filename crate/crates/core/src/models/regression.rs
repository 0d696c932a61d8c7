//! Regression baselines over dense feature vectors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::config::ModelKind;
use crate::engine::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionHyper {
    /// Penalty `½·l2·‖β‖²` added to the summed negative log-likelihood; intercepts
    /// and thresholds are not penalized. Unused by least squares.
    pub l2: f64,
    pub max_iter: usize,
    /// Stop once the gradient norm (per sample) falls below this.
    pub tol: f64,
}

impl Default for RegressionHyper {
    fn default() -> Self {
        RegressionHyper {
            l2: 1.0,
            max_iter: 5000,
            tol: 1e-9,
        }
    }
}

/// Column means and deviations; columns with zero variance keep deviation 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::EmptyInput("no training rows"));
        }
        let d = x[0].len();
        let mut mean = vec![0.0; d];
        for row in x {
            if row.len() != d {
                return Err(Error::shape("standardize", "ragged feature rows"));
            }
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n as f64;
            }
        }
        let mut var = vec![0.0; d];
        for row in x {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m).powi(2) / n as f64;
            }
        }
        if var.iter().all(|&v| v <= 1e-24) {
            return Err(Error::Degenerate("every feature has zero variance".into()));
        }
        let std = var
            .iter()
            .map(|&v| if v > 1e-24 { v.sqrt() } else { 1.0 })
            .collect();
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegressionModel {
    Linreg {
        n_classes: usize,
        weights: Vec<f64>,
        bias: f64,
    },
    LogregOvr {
        /// One `(weights, bias)` pair per class.
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
    },
    OrdinalLogreg {
        beta: Vec<f64>,
        /// Sorted cut points, `n_classes - 1` of them.
        thresholds: Vec<f64>,
    },
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Index of the largest value; ties go to the lower index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl RegressionModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            RegressionModel::Linreg { .. } => ModelKind::Linreg,
            RegressionModel::LogregOvr { .. } => ModelKind::LogregOvr,
            RegressionModel::OrdinalLogreg { .. } => ModelKind::OrdinalLogreg,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            RegressionModel::Linreg { n_classes, .. } => *n_classes,
            RegressionModel::LogregOvr { biases, .. } => biases.len(),
            RegressionModel::OrdinalLogreg { thresholds, .. } => thresholds.len() + 1,
        }
    }

    /// Raw linear-regression output; `None` for the other kinds.
    pub fn linear_score(&self, x: &[f64]) -> Option<f64> {
        match self {
            RegressionModel::Linreg { weights, bias, .. } => Some(dot(weights, x) + bias),
            _ => None,
        }
    }

    /// Class scores. Ordinal: exact class probabilities. One-vs-rest: the
    /// per-class sigmoid outputs, unnormalized. Linear: one-hot of the prediction.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        match self {
            RegressionModel::Linreg { n_classes, .. } => {
                let mut v = vec![0.0; *n_classes];
                v[self.predict(x)] = 1.0;
                v
            }
            RegressionModel::LogregOvr { weights, biases } => weights
                .iter()
                .zip(biases)
                .map(|(w, b)| sigmoid(dot(w, x) + b))
                .collect(),
            RegressionModel::OrdinalLogreg { beta, thresholds } => {
                let eta = dot(beta, x);
                let k = thresholds.len() + 1;
                let cdf = |j: usize| {
                    if j + 1 >= k {
                        1.0
                    } else {
                        sigmoid(thresholds[j] - eta)
                    }
                };
                (0..k)
                    .map(|j| cdf(j) - if j == 0 { 0.0 } else { cdf(j - 1) })
                    .collect()
            }
        }
    }

    /// Normalized class distribution.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let s = self.scores(x);
        let z: f64 = s.iter().sum();
        if z > 0.0 {
            s.iter().map(|v| v / z).collect()
        } else {
            vec![1.0 / s.len() as f64; s.len()]
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        match self {
            RegressionModel::Linreg {
                n_classes,
                weights,
                bias,
            } => {
                let y = (dot(weights, x) + bias).clamp(0.0, (*n_classes - 1) as f64);
                y.round() as usize
            }
            _ => argmax(&self.scores(x)),
        }
    }

    /// Parameters as named tensors, for checkpoints.
    pub fn to_tensors(&self) -> Vec<(String, Tensor)> {
        match self {
            RegressionModel::Linreg { weights, bias, .. } => vec![
                ("linreg.weights".into(), Tensor::vector(weights.clone())),
                ("linreg.bias".into(), Tensor::scalar(*bias)),
            ],
            RegressionModel::LogregOvr { weights, biases } => {
                let d = weights.first().map_or(0, Vec::len);
                let flat = weights.iter().flatten().copied().collect();
                vec![
                    (
                        "logreg.weights".into(),
                        Tensor::matrix(weights.len(), d, flat).expect("rectangular"),
                    ),
                    ("logreg.biases".into(), Tensor::vector(biases.clone())),
                ]
            }
            RegressionModel::OrdinalLogreg { beta, thresholds } => vec![
                ("ordinal.beta".into(), Tensor::vector(beta.clone())),
                (
                    "ordinal.thresholds".into(),
                    Tensor::vector(thresholds.clone()),
                ),
            ],
        }
    }

    pub fn from_tensors(
        kind: ModelKind,
        n_classes: usize,
        tensors: &[(String, Tensor)],
    ) -> Result<Self> {
        let get = |name: &str| {
            tensors
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t)
                .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))
        };
        Ok(match kind {
            ModelKind::Linreg => RegressionModel::Linreg {
                n_classes,
                weights: get("linreg.weights")?.data().to_vec(),
                bias: get("linreg.bias")?.data()[0],
            },
            ModelKind::LogregOvr => {
                let w = get("logreg.weights")?;
                let (k, d) = w.dims2();
                RegressionModel::LogregOvr {
                    weights: (0..k)
                        .map(|c| w.data()[c * d..(c + 1) * d].to_vec())
                        .collect(),
                    biases: get("logreg.biases")?.data().to_vec(),
                }
            }
            ModelKind::OrdinalLogreg => RegressionModel::OrdinalLogreg {
                beta: get("ordinal.beta")?.data().to_vec(),
                thresholds: get("ordinal.thresholds")?.data().to_vec(),
            },
            other => return Err(Error::Config(format!("{other} is not a regression model"))),
        })
    }
}

pub fn fit_regression(
    kind: ModelKind,
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    hyper: &RegressionHyper,
) -> Result<RegressionModel> {
    if x.len() != y.len() {
        return Err(Error::shape(
            "fit_regression",
            format!("{} rows, {} labels", x.len(), y.len()),
        ));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("no training rows"));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::InvalidArgument(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    // rejects all-constant designs
    Standardizer::fit(x)?;
    match kind {
        ModelKind::Linreg => fit_linear(x, y, n_classes),
        ModelKind::LogregOvr => {
            let mut weights = Vec::with_capacity(n_classes);
            let mut biases = Vec::with_capacity(n_classes);
            for c in 0..n_classes {
                let t: Vec<f64> = y.iter().map(|&v| if v == c { 1.0 } else { 0.0 }).collect();
                let (w, b) = fit_logistic(x, &t, hyper)?;
                weights.push(w);
                biases.push(b);
            }
            Ok(RegressionModel::LogregOvr { weights, biases })
        }
        ModelKind::OrdinalLogreg => fit_ordinal(x, y, n_classes, hyper),
        other => Err(Error::Config(format!("{other} is not a regression model"))),
    }
}

/// Ordinary least squares with intercept, via SVD on the centred design.
fn fit_linear(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<RegressionModel> {
    let n = x.len();
    let d = x[0].len();
    let mut mean = vec![0.0; d];
    for row in x {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / n as f64;
        }
    }
    let y_mean = y.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let a = DMatrix::from_fn(n, d, |i, j| x[i][j] - mean[j]);
    let b = DVector::from_fn(n, |i, _| y[i] as f64 - y_mean);
    let svd = a.svd(true, true);
    let w = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::Degenerate(format!("least squares failed: {e}")))?;
    let weights: Vec<f64> = w.iter().copied().collect();
    let bias = y_mean - dot(&weights, &mean);
    Ok(RegressionModel::Linreg {
        n_classes,
        weights,
        bias,
    })
}

/// Binary logistic regression by damped Newton steps. Returns `(weights, bias)`.
pub(crate) fn fit_logistic(
    x: &[Vec<f64>],
    t: &[f64],
    hyper: &RegressionHyper,
) -> Result<(Vec<f64>, f64)> {
    let n = x.len();
    let d = x[0].len();
    let p = d + 1;
    let mut theta = DVector::<f64>::zeros(p);

    let objective = |theta: &DVector<f64>| -> f64 {
        let mut f = 0.0;
        for (row, &ti) in x.iter().zip(t) {
            let z = dot(&theta.as_slice()[..d], row) + theta[d];
            // log(1 + e^z) - t·z
            f += z.max(0.0) + (-z.abs()).exp().ln_1p() - ti * z;
        }
        f + 0.5 * hyper.l2 * theta.rows(0, d).norm_squared()
    };

    let mut f_cur = objective(&theta);
    for _ in 0..hyper.max_iter.min(200) {
        let mut grad = DVector::<f64>::zeros(p);
        let mut hess = DMatrix::<f64>::zeros(p, p);
        for (row, &ti) in x.iter().zip(t) {
            let z = dot(&theta.as_slice()[..d], row) + theta[d];
            let s = sigmoid(z);
            let r = s - ti;
            let w = (s * (1.0 - s)).max(1e-12);
            for j in 0..d {
                grad[j] += r * row[j];
            }
            grad[d] += r;
            for j in 0..p {
                let xj = if j < d { row[j] } else { 1.0 };
                for k in j..p {
                    let xk = if k < d { row[k] } else { 1.0 };
                    hess[(j, k)] += w * xj * xk;
                }
            }
        }
        for j in 0..d {
            grad[j] += hyper.l2 * theta[j];
            hess[(j, j)] += hyper.l2;
        }
        for j in 0..p {
            for k in 0..j {
                hess[(j, k)] = hess[(k, j)];
            }
        }
        if grad.norm() / n as f64 <= hyper.tol {
            break;
        }
        let mut jitter = 0.0;
        let step = loop {
            let mut h = hess.clone();
            for j in 0..p {
                h[(j, j)] += jitter;
            }
            if let Some(ch) = h.cholesky() {
                break ch.solve(&grad);
            }
            jitter = if jitter == 0.0 { 1e-10 } else { jitter * 10.0 };
            if jitter > 1e6 {
                return Err(Error::Degenerate(
                    "logistic Hessian is not positive definite".into(),
                ));
            }
        };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand = &theta - &step * alpha;
            let f_new = objective(&cand);
            if f_new <= f_cur {
                theta = cand;
                improved = f_cur - f_new > 0.0;
                f_cur = f_new;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((theta.as_slice()[..d].to_vec(), theta[d]))
}

/// Thresholds from the unconstrained parameters: `θ₀ = a₀`, `θⱼ = θⱼ₋₁ + exp(aⱼ)`.
fn thresholds_from(a: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len());
    let mut acc = 0.0;
    for (j, &v) in a.iter().enumerate() {
        acc = if j == 0 { v } else { acc + v.exp() };
        out.push(acc);
    }
    out
}

/// Mean penalized log-likelihood of the proportional-odds model and its gradient
/// with respect to `(β, a)`.
fn ordinal_objective(
    x: &[Vec<f64>],
    y: &[usize],
    beta: &[f64],
    a: &[f64],
    l2: f64,
    want_grad: bool,
) -> (f64, Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let d = beta.len();
    let m = a.len();
    let th = thresholds_from(a);
    let mut ll = 0.0;
    let mut g_beta = vec![0.0; d];
    let mut g_th = vec![0.0; m];
    for (row, &c) in x.iter().zip(y) {
        let eta = dot(beta, row);
        // upper and lower cumulative probabilities of class c
        let (hi, dhi) = if c < m {
            let s = sigmoid(th[c] - eta);
            (s, s * (1.0 - s))
        } else {
            (1.0, 0.0)
        };
        let (lo, dlo) = if c > 0 {
            let s = sigmoid(th[c - 1] - eta);
            (s, s * (1.0 - s))
        } else {
            (0.0, 0.0)
        };
        // 1 - σ(u) and σ(u) are computed directly to avoid cancellation at the ends
        let p = if c == 0 {
            hi
        } else if c == m {
            sigmoid(eta - th[c - 1])
        } else {
            hi - lo
        }
        .max(1e-300);
        ll += p.ln();
        if want_grad {
            if c < m {
                g_th[c] += dhi / p;
            }
            if c > 0 {
                g_th[c - 1] -= dlo / p;
            }
            let d_eta = -(dhi - dlo) / p;
            for (g, v) in g_beta.iter_mut().zip(row) {
                *g += d_eta * v;
            }
        }
    }
    let penalty = 0.5 * l2 * beta.iter().map(|b| b * b).sum::<f64>();
    let f = (ll - penalty) / n;
    if !want_grad {
        return (f, Vec::new(), Vec::new());
    }
    for (g, b) in g_beta.iter_mut().zip(beta) {
        *g = (*g - l2 * b) / n;
    }
    // chain through the cumulative-exp parameterization
    let mut g_a = vec![0.0; m];
    let mut tail = 0.0;
    for j in (0..m).rev() {
        tail += g_th[j];
        g_a[j] = if j == 0 { tail } else { tail * a[j].exp() };
    }
    for g in &mut g_a {
        *g /= n;
    }
    (f, g_beta, g_a)
}

/// Proportional-odds fit by gradient ascent with backtracking line search.
fn fit_ordinal(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    hyper: &RegressionHyper,
) -> Result<RegressionModel> {
    if n_classes < 2 {
        return Err(Error::InvalidArgument(
            "ordinal regression needs at least two classes".into(),
        ));
    }
    let d = x[0].len();
    let m = n_classes - 1;
    let n = x.len() as f64;

    // start from the empirical cumulative class frequencies
    let mut counts = vec![0.0; n_classes];
    for &c in y {
        counts[c] += 1.0;
    }
    let mut cum = 0.0;
    let mut th0 = Vec::with_capacity(m);
    for c in counts.iter().take(m) {
        cum += c;
        let q = ((cum + 0.5) / (n + 1.0)).clamp(1e-6, 1.0 - 1e-6);
        th0.push((q / (1.0 - q)).ln());
    }
    let mut a: Vec<f64> = th0
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            if j == 0 {
                t
            } else {
                (t - th0[j - 1]).max(1e-3).ln()
            }
        })
        .collect();
    let mut beta = vec![0.0; d];

    let (mut f, mut gb, mut ga) = ordinal_objective(x, y, &beta, &a, hyper.l2, true);
    let mut step = 1.0;
    for _ in 0..hyper.max_iter {
        let gnorm2: f64 = gb.iter().chain(&ga).map(|g| g * g).sum();
        if gnorm2.sqrt() <= hyper.tol {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let nb: Vec<f64> = beta.iter().zip(&gb).map(|(b, g)| b + step * g).collect();
            let na: Vec<f64> = a.iter().zip(&ga).map(|(v, g)| v + step * g).collect();
            let (nf, _, _) = ordinal_objective(x, y, &nb, &na, hyper.l2, false);
            if nf >= f + 1e-4 * step * gnorm2 {
                beta = nb;
                a = na;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let (nf, nb, na) = ordinal_objective(x, y, &beta, &a, hyper.l2, true);
        f = nf;
        gb = nb;
        ga = na;
        step *= 2.0;
    }
    Ok(RegressionModel::OrdinalLogreg {
        beta,
        thresholds: thresholds_from(&a),
    })
}
