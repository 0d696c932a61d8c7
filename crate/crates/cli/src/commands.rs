use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use fakenews_core::corpus::{
    load_official_splits, locate_split_files, parse_liar, parse_unlabeled, write_tsv, LabelSpace,
    Record, SplitManifest, SplitSpec, Variant,
};
use fakenews_core::credit::{credit_score, history_ratio, CreditScoreParams};
use fakenews_core::harness::{
    compare, cross_validate, read_json, train_eval, write_json, write_loss_series, ConfusionMatrix,
    Metrics, MetricsReport, TrainedModel,
};
use fakenews_core::models::ModelKind;
use fakenews_core::text::{load_embeddings_filtered, tokenize, EmbeddingTable};
use fakenews_core::CreditCounts;

use crate::args::{
    Command, CompareArgs, CvArgs, DataArgs, EvaluateArgs, ExperimentArgs, PredictArgs, PrepareArgs,
    ScoreArgs, TrainArgs,
};
use crate::config::{resolve, RunConfig};

/// Written once per run next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config_path: Option<PathBuf>,
    pub data_paths: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub output_directory: PathBuf,
    pub artifact_version: String,
    pub config_hash: Option<String>,
    /// Fully resolved configuration, when the command used one.
    pub config: Option<RunConfig>,
}

impl RunManifest {
    fn new(command: &str, out: &Path) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config_path: None,
            data_paths: Vec::new(),
            seed: None,
            output_directory: out.to_path_buf(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: None,
            config: None,
        }
    }

    fn write(&self) -> Result<()> {
        write_json(self.output_directory.join("run_manifest.json"), self)?;
        Ok(())
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Prepare(a) => prepare(a),
        Command::Train(a) => train(a),
        Command::Cv(a) => cv(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Predict(a) => predict(a),
        Command::Compare(a) => compare_reports(a),
        Command::ScoreSpeaker(a) => score_speaker(a),
    }
}

fn ensure_exists(path: &Path, what: &str) -> Result<()> {
    if !path.exists() {
        bail!("{what} not found: {}", path.display());
    }
    Ok(())
}

fn out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))
}

/// Records, their split, and the files they came from.
struct Loaded {
    records: Vec<Record>,
    split: SplitSpec,
    paths: Vec<PathBuf>,
    /// Where the partition came from, copied into reports.
    split_note: String,
}

fn load_data(args: &DataArgs, seed: u64) -> Result<Loaded> {
    ensure_exists(&args.data, "data path")?;
    let (records, split, mut paths, mut split_note) = if args.data.is_dir() {
        let files = locate_split_files(&args.data)?;
        let (records, split) = load_official_splits(&args.data, args.variant, seed)?;
        let note = format!(
            "official published train/validation/test files used unchanged from {}",
            args.data.display()
        );
        (records, split, files.to_vec(), note)
    } else {
        let records = parse_liar(&args.data, args.variant)?;
        let split = SplitSpec::random(records.len(), args.validation_frac, args.test_frac, seed)?;
        let note = format!(
            "random stratified split of {} (validation {}, test {}, seed {seed})",
            args.data.display(),
            args.validation_frac,
            args.test_frac
        );
        (records, split, vec![args.data.clone()], note)
    };
    let split = match &args.manifest {
        Some(m) => {
            ensure_exists(m, "split manifest")?;
            paths.push(m.clone());
            split_note = format!("split taken from manifest {}", m.display());
            SplitManifest::read(m)?.resolve(&records)?
        }
        None => split,
    };
    Ok(Loaded {
        records,
        split,
        paths,
        split_note,
    })
}

/// Embedding rows for the tokens that occur in `records`.
fn load_table(path: &Path, dim: usize, records: &[Record]) -> Result<EmbeddingTable> {
    ensure_exists(path, "embeddings file")?;
    let mut vocab = HashSet::new();
    for r in records {
        vocab.extend(tokenize(&r.statement));
        if let Some(j) = &r.justification {
            vocab.extend(tokenize(j));
        }
    }
    Ok(load_embeddings_filtered(path, dim, |t| vocab.contains(t))?)
}

#[derive(Serialize)]
struct PrepareSummary {
    variant: Variant,
    records: usize,
    train: usize,
    validation: usize,
    test: usize,
    label_counts: BTreeMap<String, usize>,
    records_with_missing_counts: usize,
    records_without_speaker: usize,
}

fn prepare(a: PrepareArgs) -> Result<()> {
    let out = &a.out.out;
    let Loaded {
        records,
        split,
        paths,
        ..
    } = load_data(&a.data, a.seed)?;
    out_dir(out)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    write_tsv(out.join("train.tsv"), &pick(&split.train), a.data.variant)?;
    write_tsv(
        out.join("valid.tsv"),
        &pick(&split.validation),
        a.data.variant,
    )?;
    write_tsv(out.join("test.tsv"), &pick(&split.test), a.data.variant)?;
    split
        .manifest(&records)
        .write(out.join("split_manifest.json"))?;

    let mut label_counts = BTreeMap::new();
    for r in &records {
        *label_counts.entry(r.label.to_string()).or_insert(0) += 1;
    }
    let summary = PrepareSummary {
        variant: a.data.variant,
        records: records.len(),
        train: split.train.len(),
        validation: split.validation.len(),
        test: split.test.len(),
        label_counts,
        records_with_missing_counts: records.iter().filter(|r| r.counts.has_missing()).count(),
        records_without_speaker: records.iter().filter(|r| r.speaker.is_none()).count(),
    };
    write_json(out.join("prepare_summary.json"), &summary)?;
    println!(
        "{} records ({} train / {} validation / {} test) written to {}",
        summary.records,
        summary.train,
        summary.validation,
        summary.test,
        out.display()
    );

    let mut m = RunManifest::new("prepare", out);
    m.data_paths = paths;
    m.seed = Some(a.seed);
    m.write()
}

/// Shared set-up of `train` and `cv`.
fn experiment(exp: &ExperimentArgs) -> Result<(RunConfig, Loaded, EmbeddingTable)> {
    if let Some(p) = &exp.config {
        ensure_exists(p, "config file")?;
    }
    let rc = resolve(exp.config.as_deref(), &exp.model, &exp.train)?;
    let mut data = load_data(&exp.data, rc.train.seed)?;
    let table = load_table(&exp.embeddings, rc.model.embedding_dim, &data.records)?;
    data.paths.push(exp.embeddings.clone());
    Ok((rc, data, table))
}

fn write_config(out: &Path, rc: &RunConfig) -> Result<()> {
    let text = toml::to_string(rc).context("serializing config")?;
    fs::write(out.join("config.toml"), text)
        .with_context(|| format!("writing {}", out.join("config.toml").display()))
}

fn experiment_manifest(
    command: &str,
    exp: &ExperimentArgs,
    rc: &RunConfig,
    paths: Vec<PathBuf>,
) -> RunManifest {
    let mut m = RunManifest::new(command, &exp.out.out);
    m.config_path = exp.config.clone();
    m.data_paths = paths;
    m.seed = Some(rc.train.seed);
    m.config_hash = Some(rc.model.hash());
    m.config = Some(rc.clone());
    m
}

fn print_metrics(label: &str, m: &Metrics, space: LabelSpace) {
    match space {
        LabelSpace::Binary => println!(
            "{label}: accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}",
            m.accuracy, m.precision, m.recall, m.f1
        ),
        LabelSpace::Six => println!(
            "{label}: accuracy {:.4}  macro precision {:.4}  macro recall {:.4}  macro f1 {:.4}",
            m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1
        ),
    }
}

fn train(a: TrainArgs) -> Result<()> {
    let exp = &a.exp;
    let (rc, data, table) = experiment(exp)?;
    let Loaded {
        records,
        split,
        paths,
        split_note,
    } = data;
    let out = &exp.out.out;
    out_dir(out)?;
    let mut outcome = train_eval(&rc.model, &records, &split, &rc.train, &table)?;
    outcome.report.notes.insert(0, split_note);
    outcome.model.save(out.join("model.ckpt"))?;
    write_json(out.join("report.json"), &outcome.report)?;
    write_loss_series(
        out.join("loss_train.tsv"),
        &outcome.report.loss_history.train,
    )?;
    write_loss_series(
        out.join("loss_validation.tsv"),
        &outcome.report.loss_history.validation,
    )?;
    split
        .manifest(&records)
        .write(out.join("split_manifest.json"))?;
    write_config(out, &rc)?;
    print_metrics("test", &outcome.report.test, rc.model.label_space);
    if let Some((w, b)) = outcome.model.credit_params() {
        println!("credit score parameters: w = {w:.6}, b = {b:.6}");
    }
    experiment_manifest("train", exp, &rc, paths).write()
}

fn cv(a: CvArgs) -> Result<()> {
    let exp = &a.exp;
    let (rc, data, table) = experiment(exp)?;
    let Loaded {
        records,
        split,
        paths,
        split_note,
    } = data;
    let out = &exp.out.out;
    out_dir(out)?;
    let pool: Vec<usize> = split
        .train
        .iter()
        .chain(&split.validation)
        .copied()
        .collect();
    let mut report = cross_validate(
        &rc.model,
        &records,
        &pool,
        a.k,
        rc.train.seed,
        &rc.train,
        &table,
    )?;
    report.notes.insert(
        0,
        format!("folds drawn from the train and validation partitions; {split_note}"),
    );
    write_json(out.join("cv_report.json"), &report)?;
    for (i, f) in report.folds.iter().enumerate() {
        if !f.loss_history.train.is_empty() {
            write_loss_series(
                out.join(format!("fold{}_loss_train.tsv", i + 1)),
                &f.loss_history.train,
            )?;
            write_loss_series(
                out.join(format!("fold{}_loss_validation.tsv", i + 1)),
                &f.loss_history.validation,
            )?;
        }
    }
    write_config(out, &rc)?;
    println!(
        "{}-fold {} / {}: mean accuracy {:.4}  variance {:.6}",
        a.k, rc.model.kind, rc.model.label_space, report.mean.accuracy, report.variance.accuracy
    );
    experiment_manifest("cv", exp, &rc, paths).write()
}

#[derive(Serialize)]
struct EvaluationReport {
    model: ModelKind,
    label_space: LabelSpace,
    config_hash: String,
    threshold: f64,
    n: usize,
    confusion: ConfusionMatrix,
    #[serde(flatten)]
    metrics: Metrics,
}

fn labelled_file(data: &Path) -> Result<PathBuf> {
    ensure_exists(data, "data path")?;
    Ok(if data.is_dir() {
        let [_, _, test] = locate_split_files(data)?;
        test
    } else {
        data.to_path_buf()
    })
}

fn load_model(path: &Path) -> Result<TrainedModel> {
    ensure_exists(path, "checkpoint")?;
    TrainedModel::load(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let model = load_model(&a.checkpoint)?;
    let file = labelled_file(&a.data)?;
    let records = parse_liar(&file, a.variant)?;
    let (confusion, metrics) = model.evaluate(&records, a.batch_size)?;
    out_dir(&a.out.out)?;
    let report = EvaluationReport {
        model: model.config.kind,
        label_space: model.label_space(),
        config_hash: model.config.hash(),
        threshold: fakenews_core::harness::THRESHOLD,
        n: records.len(),
        confusion,
        metrics,
    };
    write_json(a.out.out.join("evaluation.json"), &report)?;
    print_metrics(
        &file.display().to_string(),
        &report.metrics,
        report.label_space,
    );
    let mut m = RunManifest::new("evaluate", &a.out.out);
    m.data_paths = vec![file, a.checkpoint.clone()];
    m.seed = Some(model.seed);
    m.config_hash = Some(report.config_hash);
    m.write()
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.checkpoint)?;
    ensure_exists(&a.data, "data file")?;
    let records = parse_unlabeled(&a.data, a.variant)?;
    let probs = model.predict_proba(&records, a.batch_size)?;
    let preds = model.predict(&records, a.batch_size)?;
    let space = model.label_space();
    let names: Vec<String> = (0..space.n_classes())
        .map(|c| space.class_name(c))
        .collect();

    out_dir(&a.out.out)?;
    let mut text = String::from("id\tprediction");
    for n in &names {
        text.push_str(&format!("\tp_{n}"));
    }
    text.push('\n');
    for ((r, p), &c) in records.iter().zip(&probs).zip(&preds) {
        text.push_str(&format!("{}\t{}", r.id, names[c]));
        for v in p {
            text.push_str(&format!("\t{v}"));
        }
        text.push('\n');
    }
    let path = a.out.out.join("predictions.tsv");
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "{} predictions written to {}",
        records.len(),
        path.display()
    );
    let mut m = RunManifest::new("predict", &a.out.out);
    m.data_paths = vec![a.data.clone(), a.checkpoint.clone()];
    m.seed = Some(model.seed);
    m.config_hash = Some(model.config.hash());
    m.write()
}

fn compare_reports(a: CompareArgs) -> Result<()> {
    let mut reports = Vec::new();
    let mut paths = Vec::new();
    for spec in &a.reports {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) => (Some(n.to_string()), PathBuf::from(p)),
            None => (None, PathBuf::from(spec)),
        };
        let r = read_report(&path)?;
        paths.push(path);
        reports.push((name.unwrap_or_else(|| r.model.to_string()), r));
    }
    let c = compare(&reports)?;
    out_dir(&a.out.out)?;
    write_json(a.out.out.join("comparison.json"), &c)?;
    for (n, acc) in &c.accuracies {
        println!("{n:<24} accuracy {acc:.4}");
    }
    for h in &c.hypotheses {
        let verdict = match h.holds {
            Some(true) => "holds",
            Some(false) => "does not hold",
            None => "not evaluable",
        };
        let delta = h
            .delta
            .map_or(String::new(), |d| format!(" (delta {d:+.4})"));
        println!("{}: {} vs {}: {verdict}{delta}", h.claim, h.better, h.worse);
    }
    let mut m = RunManifest::new("compare", &a.out.out);
    m.data_paths = paths;
    m.write()
}

fn read_report(path: &Path) -> Result<MetricsReport> {
    ensure_exists(path, "report")?;
    read_json(path).with_context(|| format!("reading report {}", path.display()))
}

#[derive(Serialize)]
struct ScoreReport {
    counts: CreditCounts,
    w: f64,
    b: f64,
    history_ratio: f64,
    credit_score: f64,
}

fn score_speaker(a: ScoreArgs) -> Result<()> {
    let counts = CreditCounts::new(a.btc, a.fc, a.htc, a.mtc, a.pfc);
    if counts.to_array().iter().any(|&c| c < 0.0 || !c.is_finite()) {
        bail!("counts must be finite and non-negative");
    }
    let (w, b) = match &a.checkpoint {
        Some(p) => load_model(p)?
            .credit_params()
            .with_context(|| format!("{} has no credit-score branch", p.display()))?,
        None => (a.w, a.b),
    };
    let ratio = history_ratio(&counts);
    let score = credit_score(&counts, &CreditScoreParams::new(w, b));
    println!("history_ratio\t{ratio}");
    println!("credit_score\t{score}");
    out_dir(&a.out.out)?;
    write_json(
        a.out.out.join("score.json"),
        &ScoreReport {
            counts,
            w,
            b,
            history_ratio: ratio,
            credit_score: score,
        },
    )?;
    let mut m = RunManifest::new("score-speaker", &a.out.out);
    m.data_paths = a.checkpoint.clone().into_iter().collect();
    m.write()
}
