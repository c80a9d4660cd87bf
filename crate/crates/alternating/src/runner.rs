//! Corpus construction, parallel runs and result directories.
//!
//! Every (algorithm, stream) job and every sweep cell is independent; rayon's
//! indexed collect keeps results in job order, so outputs never depend on the
//! thread count.

use std::path::{Path, PathBuf};

use alternating_core::drift_sim::{gen_corpus, StreamSpec};
use alternating_core::experiment::{evaluate_cell, GridCell};
use alternating_core::metrics::{mape, mean, summarize, RunSummary, StreamScore};
use alternating_core::prequential::score_records;
use alternating_core::{run_algorithm, Algorithm, Matrix, Stream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::formats::{self, PerStreamRow};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_ECHO_FILE: &str = "config.toml";
pub const CORPUS_FILE: &str = "corpus.json";

/// One stream of the corpus, shared by all algorithms.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub kind: String,
    pub stream: Stream,
    /// Generator spec; `None` for streams read from CSV.
    pub spec: Option<StreamSpec>,
    /// True efficiency trajectory, when known.
    pub eta: Option<Vec<f64>>,
    /// Jump positions of the efficiency profile, when known.
    pub jumps: Vec<usize>,
}

pub fn stream_id(index: usize) -> String {
    format!("s{index:03}")
}

/// The generated corpus of `cfg.corpus`, or the single stream of
/// `cfg.stream_csv`.
pub fn build_corpus(cfg: &ExperimentConfig) -> Result<Vec<CorpusEntry>> {
    if let Some(path) = &cfg.stream_csv {
        let (stream, eta) = formats::read_stream(path)?;
        let id = path.file_stem().map_or_else(|| "stream".to_string(), |s| s.to_string_lossy().into_owned());
        return Ok(vec![CorpusEntry { id, kind: "external".into(), stream, spec: None, eta, jumps: Vec::new() }]);
    }
    let c = &cfg.corpus;
    let specs = gen_corpus(c.n_abrupt, c.n_gradual, c.base_seed, c.length, &c.noise())?;
    specs
        .into_par_iter()
        .map(|spec| {
            let d = spec.generate()?;
            Ok(CorpusEntry {
                id: stream_id(spec.id),
                kind: spec.kind.name().to_string(),
                stream: d.stream,
                eta: Some(d.oracle.eta),
                jumps: d.oracle.jumps,
                spec: Some(spec),
            })
        })
        .collect()
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

pub fn records_path(dir: &Path, algorithm: Algorithm, stream_id: &str) -> PathBuf {
    dir.join("records").join(algorithm.name()).join(format!("{stream_id}.csv"))
}

/// Per-stream rows in algorithm-major order, plus one summary per algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResults {
    pub per_stream: Vec<PerStreamRow>,
    pub summaries: Vec<RunSummary>,
}

impl RunResults {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&RunSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm.name())
    }
}

fn collect_results(algorithms: &[Algorithm], corpus: &[CorpusEntry], scores: Vec<StreamScore>) -> Result<RunResults> {
    let n = corpus.len();
    let mut per_stream = Vec::with_capacity(scores.len());
    let mut summaries = Vec::with_capacity(algorithms.len());
    for (a, chunk) in algorithms.iter().zip(scores.chunks(n)) {
        summaries.push(summarize(a.name(), chunk)?);
        per_stream.extend(chunk.iter().zip(corpus).map(|(s, e)| PerStreamRow {
            algorithm: a.name().to_string(),
            stream_id: s.stream_id.clone(),
            kind: e.kind.clone(),
            mean_mape: s.mean_mape,
            reset_indices: s.reset_indices.clone(),
        }));
    }
    Ok(RunResults { per_stream, summaries })
}

/// Runs every configured algorithm on every corpus stream. Record CSVs go to
/// `records_dir` when given; each file is written by exactly one job.
pub fn evaluate(cfg: &ExperimentConfig, corpus: &[CorpusEntry], records_dir: Option<&Path>) -> Result<RunResults> {
    if corpus.is_empty() {
        return Err(Error::Config("corpus is empty".into()));
    }
    let jobs: Vec<(Algorithm, &CorpusEntry)> =
        cfg.algorithms.iter().flat_map(|&a| corpus.iter().map(move |e| (a, e))).collect();
    let scores = pool(cfg.threads)?.install(|| {
        jobs.par_iter()
            .map(|&(a, e)| {
                let records = run_algorithm(a, &cfg.controller, cfg.paired_registration, &e.stream)?;
                if let Some(dir) = records_dir {
                    formats::write_records(&records_path(dir, a, &e.id), &records)?;
                }
                let (mean_mape, reset_indices) = score_records(&records)?;
                Ok(StreamScore { stream_id: e.id.clone(), mean_mape, reset_indices })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    collect_results(&cfg.algorithms, corpus, scores)
}

/// All `(δ, W)` cells of the sweep grid on the ordinary controller, δ-major.
pub fn sweep(cfg: &ExperimentConfig, corpus: &[CorpusEntry]) -> Result<Vec<GridCell>> {
    let streams: Vec<Stream> = corpus.iter().map(|e| e.stream.clone()).collect();
    let grid: Vec<(f64, usize)> =
        cfg.sweep.deltas.iter().flat_map(|&d| cfg.sweep.windows.iter().map(move |&w| (d, w))).collect();
    let cells = pool(cfg.threads)?.install(|| {
        grid.par_iter()
            .map(|&(d, w)| evaluate_cell(&cfg.controller, d, w, &streams))
            .collect::<alternating_core::Result<Vec<_>>>()
    })?;
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStream {
    pub id: String,
    pub kind: String,
    pub len: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spec: Option<StreamSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<PathBuf>,
}

/// Provenance for an output directory. Holds no timestamps or host data so
/// reruns reproduce it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub core_version: String,
    pub config_version: u32,
    pub command: String,
    pub streams: Vec<ManifestStream>,
    pub outputs: Vec<String>,
}

impl Manifest {
    fn new(cfg: &ExperimentConfig, command: &str, corpus: &[CorpusEntry], mut outputs: Vec<String>) -> Self {
        outputs.sort();
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            core_version: alternating_core::VERSION.into(),
            config_version: cfg.version,
            command: command.into(),
            streams: corpus
                .iter()
                .map(|e| ManifestStream {
                    id: e.id.clone(),
                    kind: e.kind.clone(),
                    len: e.stream.len(),
                    spec: e.spec.clone(),
                    source: if e.spec.is_none() { cfg.stream_csv.clone() } else { None },
                })
                .collect(),
            outputs,
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(Error::io(&path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    std::fs::write(path, text).map_err(Error::io(path))
}

fn finish(cfg: &ExperimentConfig, command: &str, corpus: &[CorpusEntry], dir: &Path, outputs: Vec<String>) -> Result<()> {
    write_text(&dir.join(CONFIG_ECHO_FILE), &cfg.to_toml()?)?;
    let mut all = outputs;
    all.push(CONFIG_ECHO_FILE.into());
    all.push(MANIFEST_FILE.into());
    let manifest = Manifest::new(cfg, command, corpus, all);
    write_text(&dir.join(MANIFEST_FILE), &(serde_json::to_string_pretty(&manifest)? + "\n"))
}

fn write_sweep_files(dir: &Path, cells: &[GridCell], corpus: &[CorpusEntry]) -> Result<Vec<String>> {
    let ids: Vec<String> = corpus.iter().map(|e| e.id.clone()).collect();
    formats::write_sensitivity(&dir.join("sensitivity.csv"), cells, &ids)?;
    formats::write_sensitivity_summary(&dir.join("sensitivity_summary.csv"), cells)?;
    Ok(vec!["sensitivity.csv".into(), "sensitivity_summary.csv".into()])
}

/// What [`run_experiment`] produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub results: RunResults,
    pub sweep: Option<Vec<GridCell>>,
}

/// Full run into `cfg.output_dir`: per-stream and summary CSVs, record CSVs,
/// the sensitivity grid when enabled, the merged config and a manifest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    let corpus = pool(cfg.threads)?.install(|| build_corpus(cfg))?;
    std::fs::create_dir_all(&dir).map_err(Error::io(&dir))?;
    let records_dir = cfg.write_records.then_some(dir.as_path());
    let results = evaluate(cfg, &corpus, records_dir)?;
    formats::write_per_stream(&dir.join("per_stream.csv"), &results.per_stream)?;
    formats::write_summary(&dir.join("summary.csv"), &results.summaries)?;
    let mut outputs = vec!["per_stream.csv".to_string(), "summary.csv".to_string()];
    if cfg.write_records {
        for a in &cfg.algorithms {
            outputs.extend(corpus.iter().map(|e| format!("records/{}/{}.csv", a.name(), e.id)));
        }
    }
    let sweep_cells = if cfg.sweep.enabled {
        let cells = sweep(cfg, &corpus)?;
        outputs.extend(write_sweep_files(&dir, &cells, &corpus)?);
        Some(cells)
    } else {
        None
    };
    finish(cfg, "run", &corpus, &dir, outputs)?;
    Ok(RunReport { dir, results, sweep: sweep_cells })
}

/// Sweep only, into `cfg.output_dir`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<GridCell>> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    let corpus = pool(cfg.threads)?.install(|| build_corpus(cfg))?;
    let cells = sweep(cfg, &corpus)?;
    let outputs = write_sweep_files(&dir, &cells, &corpus)?;
    finish(cfg, "sweep", &corpus, &dir, outputs)?;
    Ok(cells)
}

/// Writes the corpus as `streams/<id>.csv` (with `eta_true`) plus the specs
/// in `corpus.json`.
pub fn generate(cfg: &ExperimentConfig) -> Result<Vec<CorpusEntry>> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    let corpus = pool(cfg.threads)?.install(|| build_corpus(cfg))?;
    pool(cfg.threads)?.install(|| {
        corpus
            .par_iter()
            .map(|e| formats::write_stream(&dir.join("streams").join(format!("{}.csv", e.id)), &e.stream, e.eta.as_deref()))
            .collect::<Result<Vec<()>>>()
    })?;
    let specs: Vec<&StreamSpec> = corpus.iter().filter_map(|e| e.spec.as_ref()).collect();
    write_text(&dir.join(CORPUS_FILE), &(serde_json::to_string_pretty(&specs)? + "\n"))?;
    let mut outputs: Vec<String> = corpus.iter().map(|e| format!("streams/{}.csv", e.id)).collect();
    outputs.push(CORPUS_FILE.into());
    finish(cfg, "generate", &corpus, &dir, outputs)?;
    Ok(corpus)
}

/// Rescores the record CSVs of a finished run and rewrites `per_stream.csv`
/// and `summary.csv`, in the order of the echoed config and the manifest.
pub fn summarize_dir(dir: &Path) -> Result<RunResults> {
    let manifest = Manifest::load(dir)?;
    let echo = dir.join(CONFIG_ECHO_FILE);
    let cfg = ExperimentConfig::from_toml(&std::fs::read_to_string(&echo).map_err(Error::io(&echo))?)?;
    let algorithms = cfg.algorithms;
    let mut per_stream = Vec::new();
    let mut summaries = Vec::new();
    for a in &algorithms {
        let mut scores = Vec::with_capacity(manifest.streams.len());
        for s in &manifest.streams {
            let rows = formats::read_records(&records_path(dir, *a, &s.id))?;
            let errs = rows
                .iter()
                .map(|r| mape(&Matrix::column(&r.y_pred), &Matrix::column(&r.y_true)))
                .collect::<alternating_core::Result<Vec<_>>>()?;
            let reset_indices = rows.iter().filter(|r| r.reset).map(|r| r.index).collect();
            let score = StreamScore { stream_id: s.id.clone(), mean_mape: mean(&errs), reset_indices };
            per_stream.push(PerStreamRow {
                algorithm: a.name().to_string(),
                stream_id: s.id.clone(),
                kind: s.kind.clone(),
                mean_mape: score.mean_mape,
                reset_indices: score.reset_indices.clone(),
            });
            scores.push(score);
        }
        summaries.push(summarize(a.name(), &scores)?);
    }
    let results = RunResults { per_stream, summaries };
    formats::write_per_stream(&dir.join("per_stream.csv"), &results.per_stream)?;
    formats::write_summary(&dir.join("summary.csv"), &results.summaries)?;
    Ok(results)
}
