//! End-to-end commands: simulate, run, kde, inspect-model.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use htscan_core::classifiers::{train, Model, ModelKind, TrainConfig, TrainedModel};
use htscan_core::eval::{benchmark_report, evaluate, kde_export, overlap_coefficient, BenchmarkReport, KdeCurve, MetricsReport, ResultsByTrojan};
use htscan_core::features::{extract, FeatureVector, SchemaId};
use htscan_core::split::split;
use htscan_core::synth::generate_synthetic;
use htscan_core::Dataset;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{validate_feature, DatasetSource, PipelineConfig};
use crate::csv_io::{load_csv_files, write_state_files};
use crate::error::{Error, Result, Stage, StageError};
use crate::persist;
use crate::svg::kde_svg;

pub const REPORT_FILE: &str = "report.json";
pub const METADATA_FILE: &str = "metadata.json";
pub const INCOMPLETE_MARKER: &str = "RUN_INCOMPLETE";

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Generates or loads one dataset.
pub fn load_dataset(source: &DatasetSource) -> Result<Dataset> {
    match source {
        DatasetSource::Synthetic(cfg) => Ok(generate_synthetic(cfg)?),
        DatasetSource::Csv(c) => load_csv_files(&c.files, &c.options()),
    }
}

/// Loads every dataset, rejecting duplicate trojan ids.
pub fn load_all(cfg: &PipelineConfig) -> Result<Vec<Dataset>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::with_capacity(cfg.datasets.len());
    for (i, src) in cfg.datasets.iter().enumerate() {
        let ds = load_dataset(src)?;
        let id = ds.trojan_id().unwrap_or_default().to_owned();
        if let Some(prev) = seen.insert(id.clone(), i) {
            return Err(Error::config(format!("datasets[{i}]"), format!("trojan id `{id}` already used by datasets[{prev}]")));
        }
        out.push(ds);
    }
    Ok(out)
}

/// Canonical feature vectors of every trace, in dataset order.
pub fn extract_all(dataset: &Dataset) -> Result<Vec<FeatureVector>> {
    dataset.traces().par_iter().map(|t| extract(t).map_err(Error::from)).collect()
}

/// Fits each configured model on `train` and scores it on `test`.
///
/// Every preprocessing statistic a model uses is computed inside `train`,
/// which only ever sees the training split.
pub fn train_and_evaluate(
    train_set: &[FeatureVector],
    test_set: &[FeatureVector],
    models: &[TrainConfig],
) -> Result<Vec<(TrainedModel, MetricsReport)>> {
    models
        .par_iter()
        .map(|cfg| {
            let model = train(train_set, cfg)?;
            let report = evaluate(&model, test_set)?;
            Ok((model, report))
        })
        .collect()
}

fn check_unique_models(models: &[TrainConfig]) -> Result<()> {
    let mut seen = Vec::new();
    for (j, m) in models.iter().enumerate() {
        if seen.contains(&m.model_kind) {
            return Err(Error::config(format!("models[{j}]"), format!("duplicate model kind `{}`", m.model_kind)));
        }
        seen.push(m.model_kind);
    }
    Ok(())
}

/// Writes each synthetic dataset as a `<id>_disabled.csv` /
/// `<id>_triggered.csv` pair, one trace per row.
pub fn cmd_simulate(cfg: &PipelineConfig) -> Result<Vec<PathBuf>, StageError> {
    let mut written = Vec::new();
    let mut any = false;
    for (i, src) in cfg.datasets.iter().enumerate() {
        let DatasetSource::Synthetic(syn) = src else { continue };
        any = true;
        syn.validate()
            .map_err(|e| match e {
                htscan_core::Error::Config { field, reason } => Error::config(format!("datasets[{i}].synthetic.{field}"), reason),
                other => other.into(),
            })
            .stage("config")?;
        let ds = generate_synthetic(syn).stage("simulate")?;
        std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e)).stage("write")?;
        written.extend(write_state_files(&cfg.output_dir, &ds).stage("write")?);
    }
    if !any {
        return Err(Error::config("datasets", "no synthetic dataset to simulate")).stage("config");
    }
    Ok(written)
}

#[derive(Debug)]
pub struct RunOutput {
    pub report: BenchmarkReport,
    pub report_json: String,
    pub output_dir: PathBuf,
    /// Overlap coefficient of each requested KDE, keyed by `(trojan, feature)`.
    pub kde_overlaps: BTreeMap<(String, String), f64>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    finished_unix_s: u64,
    elapsed_ms: u128,
    seed: u64,
    trojans: Vec<&'a str>,
}

/// Serializes a report exactly as `cmd_run` writes it.
pub fn render_report_json(report: &BenchmarkReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn model_file_name(trojan_id: &str, kind: ModelKind) -> String {
    format!("{trojan_id}_{}.json", kind.tag())
}

/// load/generate → split → extract → train → evaluate → write artifacts.
///
/// A `RUN_INCOMPLETE` marker sits in the output directory until every
/// artifact is written; on failure it is left holding the error.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<RunOutput, StageError> {
    let started = Instant::now();
    cfg.validate().stage("config")?;
    check_unique_models(&cfg.models).stage("config")?;
    let out = cfg.output_dir.clone();
    let marker = out.join(INCOMPLETE_MARKER);
    write_file(&marker, "run started\n").stage("write")?;

    let result = run_inner(cfg, &out);
    match result {
        Ok(mut output) => {
            let meta = Metadata {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                finished_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                elapsed_ms: started.elapsed().as_millis(),
                seed: cfg.seed,
                trojans: output.report.comparison.iter().map(|r| r.trojan_id.as_str()).collect(),
            };
            let meta_json = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
            write_file(&out.join(METADATA_FILE), meta_json).stage("write")?;
            std::fs::remove_file(&marker).map_err(|e| Error::io(&marker, e)).stage("write")?;
            output.output_dir = out;
            Ok(output)
        }
        Err(e) => {
            let _ = std::fs::write(&marker, format!("run failed: {e}\n"));
            Err(e)
        }
    }
}

fn run_inner(cfg: &PipelineConfig, out: &Path) -> Result<RunOutput, StageError> {
    let datasets = load_all(cfg).stage("load")?;
    let mut results: ResultsByTrojan = BTreeMap::new();
    let mut all_features: BTreeMap<String, Vec<FeatureVector>> = BTreeMap::new();

    for ds in &datasets {
        let id = ds.trojan_id().unwrap_or_default().to_owned();
        let (train_ds, test_ds) = split(ds, &cfg.split).map_err(|source| Error::Dataset { trojan_id: id.clone(), source }).stage("split")?;
        let train_fv = extract_all(&train_ds).stage("extract")?;
        let test_fv = extract_all(&test_ds).stage("extract")?;
        let fitted = train_and_evaluate(&train_fv, &test_fv, &cfg.models).stage("train")?;
        let per_model = results.entry(id.clone()).or_default();
        for (model, report) in fitted {
            if cfg.save_models {
                let path = out.join("models").join(model_file_name(&id, model.kind()));
                write_file(&path, persist::to_json(&model)).stage("write")?;
            }
            per_model.insert(model.kind(), report);
        }
        if cfg.kde.iter().any(|r| r.trojan_id == id) {
            all_features.insert(id, train_fv.into_iter().chain(test_fv).collect());
        }
    }

    let mut kde_overlaps = BTreeMap::new();
    for req in &cfg.kde {
        let Some(vectors) = all_features.get(&req.trojan_id) else {
            return Err(Error::config("kde.trojan_id", format!("no dataset with trojan id `{}`", req.trojan_id))).stage("kde");
        };
        let ov = write_kde(out, &req.trojan_id, &req.feature, vectors, req.grid_points).stage("kde")?;
        kde_overlaps.insert((req.trojan_id.clone(), req.feature.clone()), ov.overlap);
    }

    let report = benchmark_report(&results);
    let report_json = render_report_json(&report);
    write_file(&out.join(REPORT_FILE), &report_json).stage("write")?;
    let table = format!("{}\n{}", report.render_table(), report.render_comparison());
    write_file(&out.join("table.txt"), table).stage("write")?;
    write_file(&out.join("table.csv"), report.table_csv()).stage("write")?;
    Ok(RunOutput { report, report_json, output_dir: out.to_path_buf(), kde_overlaps })
}

#[derive(Debug)]
pub struct KdeOutput {
    pub disabled: KdeCurve,
    pub triggered: KdeCurve,
    pub overlap: f64,
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
}

/// CSV with header `x,density_disabled,density_triggered`.
pub fn kde_csv(disabled: &KdeCurve, triggered: &KdeCurve) -> String {
    let mut s = String::from("x,density_disabled,density_triggered\n");
    for (a, b) in disabled.points.iter().zip(&triggered.points) {
        let _ = writeln!(s, "{},{},{}", a[0], a[1], b[1]);
    }
    s
}

fn write_kde(out: &Path, trojan_id: &str, feature: &str, vectors: &[FeatureVector], grid_points: usize) -> Result<KdeOutput> {
    validate_feature(feature)?;
    let (disabled, triggered) = kde_export(vectors, feature, grid_points)?;
    let overlap = overlap_coefficient(&disabled, &triggered)?;
    let stem = out.join("kde").join(format!("{trojan_id}_{feature}"));
    let csv_path = stem.with_extension("csv");
    let svg_path = stem.with_extension("svg");
    write_file(&csv_path, kde_csv(&disabled, &triggered))?;
    let title = format!("{trojan_id}: {feature} (overlap {overlap:.3})");
    write_file(&svg_path, kde_svg(&disabled, &triggered, &title))?;
    Ok(KdeOutput { disabled, triggered, overlap, csv_path, svg_path })
}

/// KDE of one feature over every trace of one trojan, both states.
pub fn cmd_kde(cfg: &PipelineConfig, trojan_id: &str, feature: &str, grid_points: usize) -> Result<KdeOutput, StageError> {
    validate_feature(feature).stage("config")?;
    if grid_points < 2 {
        return Err(Error::config("grid_points", "must be at least 2")).stage("config");
    }
    let mut known = Vec::new();
    for src in &cfg.datasets {
        // synthetic ids are known without generating anything
        if let DatasetSource::Synthetic(s) = src {
            if s.trojan_id != trojan_id {
                known.push(s.trojan_id.clone());
                continue;
            }
        }
        let ds = load_dataset(src).stage("load")?;
        let id = ds.trojan_id().unwrap_or_default();
        if id == trojan_id {
            let vectors = extract_all(&ds).stage("extract")?;
            return write_kde(&cfg.output_dir, trojan_id, feature, &vectors, grid_points).stage("kde");
        }
        known.push(id.to_owned());
    }
    Err(Error::config("trojan", format!("no dataset with trojan id `{trojan_id}` (available: {})", known.join(", "))))
        .stage("config")
}

/// Human-readable summary of a saved model.
pub fn inspect_model(path: &Path) -> Result<String> {
    let model = persist::load_model(path)?;
    let mut s = String::new();
    let _ = writeln!(s, "file:            {}", path.display());
    let _ = writeln!(s, "format version:  {}", persist::MODEL_FORMAT_VERSION);
    let _ = writeln!(s, "kind:            {} ({})", model.kind().title(), model.kind().tag());
    let canonical = if model.schema == SchemaId::canonical() { "canonical 25-feature" } else { "custom" };
    let _ = writeln!(s, "schema:          {} ({canonical})", model.schema);
    let _ = writeln!(s, "features:        {}", model.model.n_features());
    match &model.model {
        Model::RandomForest(m) => {
            let depth = m.trees.iter().map(|t| t.depth()).max().unwrap_or(0);
            let leaves: usize = m.trees.iter().map(|t| t.n_leaves()).sum();
            let _ = writeln!(s, "trees:           {} (max depth {depth}, {leaves} leaves)", m.trees.len());
        }
        Model::GradientBoosting(m) => {
            let _ = writeln!(s, "stages:          {} (learning rate {})", m.trees.len(), m.learning_rate);
            let _ = writeln!(s, "initial score:   {}", m.init_score);
        }
        Model::NaiveBayes(m) => {
            let _ = writeln!(s, "log priors:      disabled {:.6}, triggered {:.6}", m.log_prior[0], m.log_prior[1]);
        }
        Model::NeuralNetwork(m) => {
            let _ = writeln!(s, "hidden units:    {}", m.weights.n_hidden);
            let _ = writeln!(s, "epochs:          {} run, weights from epoch {}", m.epochs_run, m.best_epoch);
        }
    }
    Ok(s)
}
