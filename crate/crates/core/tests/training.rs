use fakenews_core::corpus::{CreditCounts, HistoryCounts, LabelSix, LabelSpace, Record, SplitSpec};
use fakenews_core::harness::{cross_validate, train_eval, TrainConfig, TrainedModel};
use fakenews_core::models::{ModelConfig, ModelKind};
use fakenews_core::synth::{synthetic_corpus, SynthSpec};
use fakenews_core::text::EmbeddingTable;

fn separable(n: usize) -> (Vec<Record>, EmbeddingTable) {
    let table = EmbeddingTable::from_entries(
        4,
        [
            ("hoax", vec![1.0, 0.0, 0.5, 0.0]),
            ("verified", vec![0.0, 1.0, 0.0, -0.5]),
            ("budget", vec![0.2, 0.2, 0.2, 0.2]),
            ("senate", vec![-0.3, 0.1, 0.0, 0.4]),
        ],
    )
    .unwrap();
    let records = (0..n)
        .map(|i| {
            let fake = i % 2 == 0;
            let cue = if fake { "hoax" } else { "verified" };
            let filler = if i % 3 == 0 {
                "budget senate"
            } else {
                "senate"
            };
            Record {
                id: format!("r{i}"),
                label: if fake {
                    LabelSix::ALL[i % 3]
                } else {
                    LabelSix::ALL[3 + i % 3]
                },
                statement: format!("{filler} {cue} {filler}"),
                subject: vec!["misc".into()],
                speaker: Some(format!("s{}", i % 7)),
                job: None,
                state: None,
                party: Some("none".into()),
                counts: HistoryCounts::complete(CreditCounts::new(1.0, 1.0, 1.0, 1.0, 1.0)),
                context: None,
                justification: None,
            }
        })
        .collect();
    (records, table)
}

fn small(kind: ModelKind, space: LabelSpace, dim: usize) -> ModelConfig {
    let mut c = ModelConfig::new(kind, space);
    c.embedding_dim = dim;
    c.lstm_hidden = 8;
    c
}

fn quick(epochs: usize, batch: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size: batch,
        patience: epochs,
        seed,
        ..TrainConfig::default()
    }
}

#[test]
fn separable_fixture_reaches_full_accuracy() {
    let (records, table) = separable(120);
    let split = SplitSpec::contiguous(80, 20, 20);
    let cfg = TrainConfig {
        lr: 0.01,
        ..quick(200, 16, 3)
    };
    let out = train_eval(
        &small(ModelKind::Seq, LabelSpace::Binary, 4),
        &records,
        &split,
        &cfg,
        &table,
    )
    .unwrap();
    assert_eq!(out.report.train_metrics.accuracy, 1.0);
    assert_eq!(out.report.test.accuracy, 1.0);
    assert_eq!(out.report.confusion.total(), 20);
}

#[test]
fn same_seed_same_report() {
    let (records, table) = synthetic_corpus(&SynthSpec::new(150, 5));
    let split = SplitSpec::contiguous(100, 25, 25);
    let cfg = small(ModelKind::Enhanced, LabelSpace::Six, 16);
    let a = train_eval(&cfg, &records, &split, &quick(3, 32, 11), &table).unwrap();
    let b = train_eval(&cfg, &records, &split, &quick(3, 32, 11), &table).unwrap();
    assert_eq!(a.report, b.report);
    let c = train_eval(&cfg, &records, &split, &quick(3, 32, 12), &table).unwrap();
    assert_ne!(a.report.loss_history, c.report.loss_history);
}

#[test]
fn checkpoint_round_trip_preserves_outputs() {
    let (records, table) = synthetic_corpus(&SynthSpec::new(120, 8));
    let split = SplitSpec::contiguous(80, 20, 20);
    let dir = tempfile::tempdir().unwrap();
    for kind in [
        ModelKind::Enhanced,
        ModelKind::SiameseShared,
        ModelKind::LogregOvr,
        ModelKind::OrdinalLogreg,
    ] {
        let out = train_eval(
            &small(kind, LabelSpace::Six, 16),
            &records,
            &split,
            &quick(2, 32, 1),
            &table,
        )
        .unwrap();
        let path = dir.path().join(format!("{kind}.ckpt"));
        out.model.save(&path).unwrap();
        let back = TrainedModel::load(&path).unwrap();
        let test: Vec<Record> = split.test.iter().map(|&i| records[i].clone()).collect();
        let p0 = out.model.predict_proba(&test, 7).unwrap();
        let p1 = back.predict_proba(&test, 7).unwrap();
        let bits = |v: &Vec<Vec<f64>>| v.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&p0), bits(&p1), "{kind}");
    }
}

#[test]
fn cross_validation_fold_sizes() {
    let (records, table) = synthetic_corpus(&SynthSpec::new(100, 2));
    let pool: Vec<usize> = (0..100).collect();
    let cfg = small(ModelKind::Linreg, LabelSpace::Binary, 16);
    let cv = cross_validate(&cfg, &records, &pool, 5, 7, &TrainConfig::default(), &table).unwrap();
    assert_eq!(cv.folds.len(), 5);
    assert!(cv
        .folds
        .iter()
        .all(|f| f.n_test == 20 && f.confusion.total() == 20));
    let accs: Vec<f64> = cv.folds.iter().map(|f| f.test.accuracy).collect();
    let mean = accs.iter().sum::<f64>() / 5.0;
    assert!((cv.mean.accuracy - mean).abs() < 1e-12);
}

#[test]
fn label_space_without_all_classes_is_rejected() {
    let (mut records, table) = separable(40);
    for r in &mut records {
        r.label = if r.label.to_binary().index() == 0 {
            LabelSix::False
        } else {
            LabelSix::True
        };
    }
    let split = SplitSpec::contiguous(30, 5, 5);
    let e = train_eval(
        &small(ModelKind::LogregOvr, LabelSpace::Six, 4),
        &records,
        &split,
        &quick(1, 8, 0),
        &table,
    );
    assert!(matches!(e, Err(fakenews_core::Error::Mismatch(_))));
}
