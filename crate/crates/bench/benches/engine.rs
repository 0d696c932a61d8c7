use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use fakenews_bench::enhanced_fixture;
use fakenews_core::credit::history_ratio;
use fakenews_core::engine::{Graph, Lstm, Mode, ParamStore, Tensor};
use fakenews_core::text::tokenize;

fn lstm(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut store = ParamStore::new();
    let embed = store
        .add("embed", Tensor::full(&[500, 100], 0.01), false)
        .unwrap();
    let layer = Lstm::new(&mut store, "lstm", 100, 128, &mut rng).unwrap();
    let seqs: Vec<Vec<usize>> = (0..256)
        .map(|i| {
            (0..8 + i % 12)
                .map(|t| 1 + (i * 31 + t * 7) % 499)
                .collect()
        })
        .collect();

    c.bench_function("lstm forward 256x(8-19) h128", |b| {
        b.iter(|| {
            let mut g = Graph::new(&store);
            let e = g.param(embed);
            black_box(layer.forward(&mut g, e, &seqs).unwrap());
        })
    });
    c.bench_function("lstm forward+backward 256x(8-19) h128", |b| {
        b.iter(|| {
            let mut g = Graph::new(&store);
            let e = g.param(embed);
            let h = layer.forward(&mut g, e, &seqs).unwrap();
            let s = g.sum(h);
            black_box(g.backward(s).unwrap());
        })
    });
}

fn network(c: &mut Criterion) {
    let (net, batch, _) = enhanced_fixture(256);
    c.bench_function("enhanced train step (batch 256)", |b| {
        b.iter_batched(
            || ChaCha8Rng::seed_from_u64(3),
            |mut rng| {
                let (g, loss) = net.loss_graph(&batch, Mode::Train, &mut rng).unwrap();
                black_box(g.backward(loss).unwrap());
            },
            BatchSize::SmallInput,
        )
    });
}

fn text_and_credit(c: &mut Criterion) {
    let (_, _, records) = enhanced_fixture(64);
    c.bench_function("tokenize 64 justifications", |b| {
        b.iter(|| {
            for r in &records {
                black_box(tokenize(r.justification.as_deref().unwrap_or("")));
            }
        })
    });
    c.bench_function("history_ratio 64 speakers", |b| {
        b.iter(|| {
            for r in &records {
                black_box(history_ratio(&r.credit_counts()));
            }
        })
    });
}

criterion_group!(benches, lstm, network, text_and_credit);
criterion_main!(benches);
