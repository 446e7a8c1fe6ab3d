//! Grid execution.

use std::collections::{HashMap, HashSet};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::GridConfig;
use crate::classify::{train_with_labels, ClassifierSpec};
use crate::corpus::{load_corpus, one_shot_split, Corpus, Document};
use crate::error::{Error, Result};
use crate::featurize::{corpus_vocabulary, FeatureMatrix, Featurizer, FitScope};
use crate::metrics::{evaluate_with, EvalReport};
use crate::rng::derive_seed;

/// Version of the `grid.json` layout.
pub const GRID_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single repeat.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> MetricSummary {
        let n = values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = (values.iter().sum::<f64>() / n).clamp(min, max);
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MetricSummary { mean, std, min, max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub accuracy: MetricSummary,
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub f1: MetricSummary,
}

impl CellSummary {
    pub fn of(reports: &[EvalReport]) -> CellSummary {
        let s = |f: fn(&EvalReport) -> f64| MetricSummary::of(&reports.iter().map(f).collect::<Vec<_>>());
        CellSummary {
            accuracy: s(|r| r.accuracy),
            precision: s(|r| r.precision),
            recall: s(|r| r.recall),
            f1: s(|r| r.f1),
        }
    }
}

/// One (dataset, featurizer, model) point of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: usize,
    pub dataset: String,
    pub featurizer: String,
    pub model: String,
    /// One report per repeat; empty when the cell failed.
    pub reports: Vec<EvalReport>,
    pub summary: Option<CellSummary>,
    pub split_seeds: Vec<u64>,
    pub model_seeds: Vec<u64>,
    /// Milliseconds per repeat (featurize, train, predict, evaluate).
    pub wall_time_ms: Vec<f64>,
    /// Distinct training warnings across repeats.
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl CellResult {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileProvenance {
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

/// Hash and size of a file.
pub fn file_provenance(path: &Path) -> Result<FileProvenance> {
    let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        bytes += n as u64;
        h.update(&buf[..n]);
    }
    Ok(FileProvenance {
        path: path.to_owned(),
        bytes,
        sha256: format!("{:x}", h.finalize()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub jobs: usize,
    pub inputs: Vec<FileProvenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub schema_version: u32,
    pub config: GridConfig,
    /// Ordered by dataset, then featurizer, then model (config order).
    pub cells: Vec<CellResult>,
    pub metadata: RunMetadata,
}

impl GridResult {
    pub fn failed_cells(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| c.failed())
    }

    pub fn cell(&self, dataset: &str, featurizer: &str, model: &str) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.featurizer == featurizer && c.model == model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: GridResult = serde_json::from_str(s)?;
        if r.schema_version != GRID_SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "grid.json schema version {} (expected {GRID_SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        Ok(r)
    }

    /// JSON with timestamps, wall times, and the worker count blanked:
    /// two runs of the same config give identical strings.
    pub fn comparable_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.metadata.started_at.clear();
        r.metadata.finished_at.clear();
        r.metadata.jobs = 0;
        r.config.jobs = None;
        for c in &mut r.cells {
            c.wall_time_ms.clear();
        }
        r.to_json()
    }
}

/// Support and query row indices of one split.
struct SplitIdx {
    seed: u64,
    support: Vec<usize>,
    query: Vec<usize>,
}

fn split_indices(corpus: &Corpus, seed: u64) -> Result<SplitIdx> {
    let split = one_shot_split(corpus, seed)?;
    let pos: HashMap<&str, usize> = corpus
        .documents()
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.as_str(), i))
        .collect();
    let support: Vec<usize> = split.support.iter().map(|d| pos[d.id.as_str()]).collect();
    let in_support: HashSet<usize> = support.iter().copied().collect();
    let query = (0..corpus.len()).filter(|i| !in_support.contains(i)).collect();
    Ok(SplitIdx {
        seed,
        support,
        query,
    })
}

fn pick(docs: &[Document], idx: &[usize]) -> Vec<Document> {
    idx.iter().map(|&i| docs[i].clone()).collect()
}

fn labels_of(docs: &[Document], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| docs[i].label.clone()).collect()
}

/// Run every cell of `config`. Configuration and input errors are returned
/// as `Err`; failures inside a cell are recorded in that cell.
pub fn run_grid(config: &GridConfig) -> Result<GridResult> {
    config.validate()?;
    let jobs = config
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Invalid(format!("worker pool: {e}")))?;
    pool.install(|| run_in_pool(config, jobs))
}

fn run_in_pool(config: &GridConfig, jobs: usize) -> Result<GridResult> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let base_seed = config.base_seed();

    let corpora: Vec<Corpus> = config
        .datasets
        .iter()
        .map(|d| {
            log::info!("loading dataset {} from {}", d.name, d.path.display());
            let mut c = load_corpus(&d.path, d.format())?;
            c.name = d.name.clone();
            Ok(c)
        })
        .collect::<Result<_>>()?;

    let featurizers: Vec<Featurizer> = config
        .featurizers
        .iter()
        .map(|spec| {
            let vocab = corpus_vocabulary(corpora.iter().flat_map(|c| c.documents()), &spec.norm);
            log::info!("loading featurizer {}", spec.display_name());
            spec.load(Some(&vocab))
        })
        .collect::<Result<_>>()?;

    let mut inputs: Vec<FileProvenance> = config
        .datasets
        .iter()
        .map(|d| d.path.as_path())
        .chain(config.featurizers.iter().flat_map(|f| f.kind.resource_paths()))
        .map(file_provenance)
        .collect::<Result<_>>()?;
    inputs.sort_by(|a, b| a.path.cmp(&b.path));
    inputs.dedup_by(|a, b| a.path == b.path);

    // Splits per (dataset, repeat); a failing split fails that dataset's cells.
    let splits: Vec<std::result::Result<Vec<SplitIdx>, String>> = corpora
        .iter()
        .map(|c| {
            (0..config.repeats)
                .map(|r| split_indices(c, base_seed.wrapping_add(r as u64)))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.to_string())
        })
        .collect();

    // Transductive features are fitted once per (dataset, featurizer) on all
    // text and shared by every repeat and model.
    let n_f = featurizers.len();
    let full: Vec<std::result::Result<Arc<FeatureMatrix>, String>> = if config.fit_scope == FitScope::Transductive {
        (0..corpora.len() * n_f)
            .into_par_iter()
            .map(|i| {
                let (c, f) = (&corpora[i / n_f], &featurizers[i % n_f]);
                f.fit(c.documents())
                    .and_then(|fitted| fitted.transform(c.documents()))
                    .map(Arc::new)
                    .map_err(|e| e.to_string())
            })
            .collect()
    } else {
        Vec::new()
    };

    let n_m = config.models.len();
    let cells: Vec<CellResult> = (0..config.n_cells())
        .into_par_iter()
        .map(|index| {
            let (d, f, m) = (index / (n_f * n_m), (index / n_m) % n_f, index % n_m);
            let mut cell = CellResult {
                index,
                dataset: config.datasets[d].name.clone(),
                featurizer: config.featurizers[f].display_name(),
                model: config.models[m].display_name(),
                reports: Vec::new(),
                summary: None,
                split_seeds: Vec::new(),
                model_seeds: Vec::new(),
                wall_time_ms: Vec::new(),
                warnings: Vec::new(),
                error: None,
            };
            let features = if config.fit_scope == FitScope::Transductive {
                Some(&full[d * n_f + f])
            } else {
                None
            };
            let outcome = run_cell(
                config,
                &corpora[d],
                &featurizers[f],
                &config.models[m],
                &splits[d],
                features,
                &mut cell,
            );
            match outcome {
                Ok(()) => cell.summary = Some(CellSummary::of(&cell.reports)),
                Err(e) => {
                    log::warn!("cell {} / {} / {} failed: {e}", cell.dataset, cell.featurizer, cell.model);
                    cell.reports.clear();
                    cell.error = Some(e);
                }
            }
            cell
        })
        .collect();

    Ok(GridResult {
        schema_version: GRID_SCHEMA_VERSION,
        config: config.clone(),
        cells,
        metadata: RunMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            started_at,
            finished_at: chrono::Utc::now().to_rfc3339(),
            jobs,
            inputs,
        },
    })
}

fn run_cell(
    config: &GridConfig,
    corpus: &Corpus,
    featurizer: &Featurizer,
    spec: &ClassifierSpec,
    splits: &std::result::Result<Vec<SplitIdx>, String>,
    features: Option<&std::result::Result<Arc<FeatureMatrix>, String>>,
    cell: &mut CellResult,
) -> std::result::Result<(), String> {
    let splits = splits.as_ref().map_err(Clone::clone)?;
    let docs = corpus.documents();
    let mut warnings = std::collections::BTreeSet::new();
    for (r, split) in splits.iter().enumerate() {
        let t0 = Instant::now();
        let (xs, xq) = match features {
            Some(full) => {
                let full = full.as_ref().map_err(Clone::clone)?;
                (full.select(&split.support), full.select(&split.query))
            }
            None => {
                let support = pick(docs, &split.support);
                let fitted = featurizer.fit(&support).map_err(|e| e.to_string())?;
                let xs = fitted.transform(&support).map_err(|e| e.to_string())?;
                let xq = fitted
                    .transform(&pick(docs, &split.query))
                    .map_err(|e| e.to_string())?;
                (xs, xq)
            }
        };
        let model_seed = spec
            .seed
            .unwrap_or_else(|| derive_seed(&[config.base_seed(), cell.index as u64, r as u64]));
        let mut seeded = spec.clone();
        seeded.seed = Some(model_seed);
        let ys = labels_of(docs, &split.support);
        let model = train_with_labels(&seeded, &xs, &ys, corpus.labels()).map_err(|e| e.to_string())?;
        let pred = model.predict(&xq).map_err(|e| e.to_string())?;
        let yq = labels_of(docs, &split.query);
        let report = evaluate_with(&yq, &pred, corpus.labels(), config.averaging).map_err(|e| e.to_string())?;
        warnings.extend(model.diagnostics.warnings.iter().cloned());
        cell.reports.push(report);
        cell.split_seeds.push(split.seed);
        cell.model_seeds.push(model_seed);
        cell.wall_time_ms.push(t0.elapsed().as_secs_f64() * 1e3);
    }
    cell.warnings = warnings.into_iter().collect();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let s = MetricSummary::of(&[0.5, 0.7, 0.6]);
        assert!((s.mean - 0.6).abs() < 1e-15);
        assert!((s.std - 0.1).abs() < 1e-12);
        assert_eq!((s.min, s.max), (0.5, 0.7));
        let one = MetricSummary::of(&[0.1, 0.1, 0.1]);
        assert!(one.mean <= one.max && one.mean >= one.min);
        assert_eq!(MetricSummary::of(&[0.3]).std, 0.0);
    }
}
