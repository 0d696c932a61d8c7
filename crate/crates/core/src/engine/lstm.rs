//! Fused LSTM kernel over a batch of variable-length index sequences.
//!
//! Gates are laid out `[input | forget | candidate | output]`, each `hidden`
//! wide. Samples are processed sorted by length so that the rows still
//! running at step `t` form a prefix; finished rows keep their state and
//! padded steps are never computed.

use super::tensor::gemm;

pub(crate) struct LstmCache {
    pub hidden: usize,
    pub input_dim: usize,
    /// sorted position → original sample
    pub order: Vec<usize>,
    /// active rows per step
    pub active: Vec<usize>,
    pub offsets: Vec<usize>,
    /// embedding row of every (step, active row), in step-major order
    pub tokens: Vec<usize>,
    pub x: Vec<f64>,
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub h_prev: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Returns the final hidden state of every sequence (`n × hidden`, original order).
pub(crate) fn forward(
    embed: &[f64],
    input_dim: usize,
    wx: &[f64],
    wh: &[f64],
    bias: &[f64],
    hidden: usize,
    seqs: &[Vec<usize>],
) -> (Vec<f64>, LstmCache) {
    let n = seqs.len();
    let h = hidden;
    let g4 = 4 * h;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| seqs[b].len().cmp(&seqs[a].len()));
    let max_len = order.first().map_or(0, |&i| seqs[i].len());

    let mut active = Vec::with_capacity(max_len);
    let mut offsets = Vec::with_capacity(max_len + 1);
    let mut total = 0;
    for t in 0..max_len {
        let n_t = order.iter().take_while(|&&i| seqs[i].len() > t).count();
        active.push(n_t);
        offsets.push(total);
        total += n_t;
    }
    offsets.push(total);

    let mut tokens = Vec::with_capacity(total);
    let mut x = vec![0.0; total * input_dim];
    for t in 0..max_len {
        for r in 0..active[t] {
            let tok = seqs[order[r]][t];
            let row = offsets[t] + r;
            tokens.push(tok);
            x[row * input_dim..(row + 1) * input_dim]
                .copy_from_slice(&embed[tok * input_dim..(tok + 1) * input_dim]);
        }
    }

    // input projections for every step at once
    let mut gates = vec![0.0; total * g4];
    for row in gates.chunks_exact_mut(g4) {
        row.copy_from_slice(bias);
    }
    gemm(total, input_dim, g4, &x, false, wx, false, &mut gates, 1.0);

    let mut hs = vec![0.0; n * h];
    let mut cs = vec![0.0; n * h];
    let mut c_all = vec![0.0; total * h];
    let mut c_prev_all = vec![0.0; total * h];
    let mut h_prev_all = vec![0.0; total * h];

    for t in 0..max_len {
        let n_t = active[t];
        let off = offsets[t];
        let g = &mut gates[off * g4..(off + n_t) * g4];
        gemm(n_t, h, g4, &hs[..n_t * h], false, wh, false, g, 1.0);
        h_prev_all[off * h..(off + n_t) * h].copy_from_slice(&hs[..n_t * h]);
        c_prev_all[off * h..(off + n_t) * h].copy_from_slice(&cs[..n_t * h]);
        for r in 0..n_t {
            let gr = &mut g[r * g4..(r + 1) * g4];
            for j in 0..h {
                let i_g = sigmoid(gr[j]);
                let f_g = sigmoid(gr[h + j]);
                let c_g = gr[2 * h + j].tanh();
                let o_g = sigmoid(gr[3 * h + j]);
                gr[j] = i_g;
                gr[h + j] = f_g;
                gr[2 * h + j] = c_g;
                gr[3 * h + j] = o_g;
                let c_new = f_g * cs[r * h + j] + i_g * c_g;
                cs[r * h + j] = c_new;
                hs[r * h + j] = o_g * c_new.tanh();
                c_all[(off + r) * h + j] = c_new;
            }
        }
    }

    let mut out = vec![0.0; n * h];
    for (r, &orig) in order.iter().enumerate() {
        out[orig * h..(orig + 1) * h].copy_from_slice(&hs[r * h..(r + 1) * h]);
    }
    let cache = LstmCache {
        hidden,
        input_dim,
        order,
        active,
        offsets,
        tokens,
        x,
        gates,
        c: c_all,
        c_prev: c_prev_all,
        h_prev: h_prev_all,
    };
    (out, cache)
}

pub(crate) struct LstmGrads {
    pub wx: Vec<f64>,
    pub wh: Vec<f64>,
    pub bias: Vec<f64>,
    /// Gradient per (step, row) input vector, aligned with `cache.tokens`.
    pub x: Option<Vec<f64>>,
}

pub(crate) fn backward(
    cache: &LstmCache,
    d_out: &[f64],
    wx: &[f64],
    wh: &[f64],
    need_x: bool,
) -> LstmGrads {
    let h = cache.hidden;
    let g4 = 4 * h;
    let d = cache.input_dim;
    let n = cache.order.len();
    let total = *cache.offsets.last().unwrap();

    let mut dh = vec![0.0; n * h];
    for (r, &orig) in cache.order.iter().enumerate() {
        dh[r * h..(r + 1) * h].copy_from_slice(&d_out[orig * h..(orig + 1) * h]);
    }
    let mut dc = vec![0.0; n * h];
    let mut da_all = vec![0.0; total * g4];
    let mut dwh = vec![0.0; h * g4];
    let mut dh_prev = vec![0.0; n * h];

    for t in (0..cache.active.len()).rev() {
        let n_t = cache.active[t];
        let off = cache.offsets[t];
        for r in 0..n_t {
            let row = off + r;
            let gr = &cache.gates[row * g4..(row + 1) * g4];
            let da = &mut da_all[row * g4..(row + 1) * g4];
            for j in 0..h {
                let (i_g, f_g, c_g, o_g) = (gr[j], gr[h + j], gr[2 * h + j], gr[3 * h + j]);
                let c = cache.c[row * h + j];
                let tc = c.tanh();
                let dhj = dh[r * h + j];
                let dcj = dc[r * h + j] + dhj * o_g * (1.0 - tc * tc);
                let d_o = dhj * tc;
                let d_i = dcj * c_g;
                let d_c = dcj * i_g;
                let d_f = dcj * cache.c_prev[row * h + j];
                da[j] = d_i * i_g * (1.0 - i_g);
                da[h + j] = d_f * f_g * (1.0 - f_g);
                da[2 * h + j] = d_c * (1.0 - c_g * c_g);
                da[3 * h + j] = d_o * o_g * (1.0 - o_g);
                dc[r * h + j] = dcj * f_g;
            }
        }
        let da_t = &da_all[off * g4..(off + n_t) * g4];
        let hp = &cache.h_prev[off * h..(off + n_t) * h];
        gemm(h, n_t, g4, hp, true, da_t, false, &mut dwh, 1.0);
        gemm(
            n_t,
            g4,
            h,
            da_t,
            false,
            wh,
            true,
            &mut dh_prev[..n_t * h],
            0.0,
        );
        dh[..n_t * h].copy_from_slice(&dh_prev[..n_t * h]);
    }

    let mut dwx = vec![0.0; d * g4];
    gemm(d, total, g4, &cache.x, true, &da_all, false, &mut dwx, 0.0);
    let mut dbias = vec![0.0; g4];
    for row in da_all.chunks_exact(g4) {
        for (b, v) in dbias.iter_mut().zip(row) {
            *b += v;
        }
    }
    let dx = need_x.then(|| {
        let mut dx = vec![0.0; total * d];
        gemm(total, g4, d, &da_all, false, wx, true, &mut dx, 0.0);
        dx
    });
    LstmGrads {
        wx: dwx,
        wh: dwh,
        bias: dbias,
        x: dx,
    }
}
