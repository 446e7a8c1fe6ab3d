//! The `oneshot` command line.
//!
//! Exit codes: 0 success, 1 validation or configuration error, 2 grid
//! finished with failed cells, 3 I/O error. Logs go to stderr; data goes
//! to files or stdout. Every command writes a run manifest next to its
//! outputs (`run-manifest.json` in an output directory, `<file>.manifest.json`
//! beside a single output file).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classify::{self, ClassifierSpec, ModelKind, TrainedModel};
use crate::corpus::{self, Format};
use crate::embedio::{self, SourceKind, SubwordModel};
use crate::error::{Error, Result};
use crate::experiment::{self, file_provenance, FileProvenance, GridConfig, GridResult};
use crate::featurize::{self, FeaturizerKind, FeaturizerSpec};
use crate::metrics::{self, Averaging};
use crate::rng::derive_seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "oneshot", version, about = "One-shot text classification experiments")]
pub struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the DC, DR, and DCR corpora from a four-column source file.
    SplitTasks(SplitTasksArgs),
    /// Draw a one-shot support/query split of a corpus.
    Split(SplitArgs),
    /// Featurize a corpus into a matrix (JSONL).
    Featurize(FeaturizeArgs),
    /// Train a classifier on a feature matrix.
    Train(TrainArgs),
    /// Score a trained model on a feature matrix.
    Eval(EvalArgs),
    /// Run a full experiment grid from a config file.
    Grid(GridArgs),
    /// Regenerate tables and charts from a grid.json.
    Report(ReportArgs),
    /// Summarize an embedding or document-vector file.
    InspectEmbeddings(InspectArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

fn ext(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Jsonl => "jsonl",
    }
}

fn input_format(path: &Path, given: Option<FormatArg>) -> Format {
    given.map_or_else(|| Format::from_path(path), Into::into)
}

#[derive(Debug, Args)]
pub struct SplitTasksArgs {
    /// Source file with columns id, doctor, chatgpt, rephrased.
    #[arg(long)]
    pub source: PathBuf,
    /// Output directory for DC, DR, DCR files.
    #[arg(long)]
    pub out: PathBuf,
    /// Input format (default: from the extension).
    #[arg(long, value_enum)]
    pub input_format: Option<FormatArg>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Corpus file (id, text, label).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory for support and query files.
    #[arg(long)]
    pub out: PathBuf,
    /// Split seed; a fresh seed is drawn and recorded when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Corpus format (default: from the extension).
    #[arg(long, value_enum)]
    pub input_format: Option<FormatArg>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FeaturizerArg {
    Bow,
    CharNgrams,
    Word2vec,
    Glove,
    Fasttext,
    DocVectors,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    /// Corpus to transform.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Corpus to fit TF-IDF statistics on (default: --corpus).
    #[arg(long)]
    pub fit_on: Option<PathBuf>,
    /// Featurizer kind.
    #[arg(long, value_enum)]
    pub kind: FeaturizerArg,
    /// Embedding or document-vector file.
    #[arg(long)]
    pub resource: Option<PathBuf>,
    /// Word2Vec file is binary.
    #[arg(long)]
    pub binary: bool,
    /// fastText subword bucket file (default: seeded buckets).
    #[arg(long)]
    pub buckets: Option<PathBuf>,
    /// Number of subword buckets when they are seeded.
    #[arg(long, default_value_t = embedio::DEFAULT_BUCKET_COUNT)]
    pub bucket_count: usize,
    /// Seed of generated subword buckets.
    #[arg(long, default_value_t = 0)]
    pub bucket_seed: u64,
    /// Smallest n-gram length (char n-grams: 2, subwords: 3 by default).
    #[arg(long)]
    pub n_min: Option<usize>,
    /// Largest n-gram length (char n-grams: 4, subwords: 6 by default).
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Output matrix file (JSONL).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Feature matrix of the training documents.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Corpus holding the labels of the matrix rows (matched by id).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Classifier kind.
    #[arg(long)]
    pub model: ModelKind,
    /// Hyperparameter override, KEY=VALUE (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Model seed; a fresh seed is drawn and recorded when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output model file (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AveragingArg {
    Weighted,
    Macro,
    Micro,
}

impl From<AveragingArg> for Averaging {
    fn from(a: AveragingArg) -> Averaging {
        match a {
            AveragingArg::Weighted => Averaging::Weighted,
            AveragingArg::Macro => Averaging::Macro,
            AveragingArg::Micro => Averaging::Micro,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Feature matrix of the documents to score.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Corpus holding the true labels (matched by id).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Metric averaging.
    #[arg(long, value_enum, default_value = "weighted")]
    pub averaging: AveragingArg,
    /// Write the full report (JSON) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Grid config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads (default: config value, else available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// One split per cell (repeats = 1).
    #[arg(long)]
    pub single_seed: bool,
    /// Override the number of repeats.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// grid.json written by `grid`.
    #[arg(long)]
    pub grid: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EmbeddingFormat {
    Glove,
    Word2vec,
    Word2vecBinary,
    Fasttext,
    DocVectors,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// File to inspect.
    #[arg(long)]
    pub path: PathBuf,
    /// File format.
    #[arg(long, value_enum)]
    pub format: EmbeddingFormat,
    /// Look up a word (repeatable); fastText composes unknown words from subwords.
    #[arg(long)]
    pub word: Vec<String>,
    /// fastText subword bucket file.
    #[arg(long)]
    pub buckets: Option<PathBuf>,
    /// Number of seeded subword buckets.
    #[arg(long, default_value_t = embedio::DEFAULT_BUCKET_COUNT)]
    pub bucket_count: usize,
}

/// Machine-readable record of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    /// `argv` with every drawn seed pinned, for a bit-identical rerun.
    pub rerun: Vec<String>,
    pub created_at: String,
    pub seeds: BTreeMap<String, u64>,
    /// "flag", "config", or "entropy".
    pub seed_source: String,
    pub inputs: Vec<FileProvenance>,
    pub outputs: Vec<PathBuf>,
}

struct Ctx {
    argv: Vec<String>,
    command: &'static str,
    seeds: BTreeMap<String, u64>,
    seed_source: &'static str,
    pinned: Vec<String>,
}

impl Ctx {
    fn manifest(&self, inputs: &[&Path], outputs: Vec<PathBuf>) -> Result<RunManifest> {
        let mut rerun = self.argv.clone();
        rerun.extend(self.pinned.iter().cloned());
        Ok(RunManifest {
            tool: "oneshot".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.into(),
            argv: self.argv.clone(),
            rerun,
            created_at: chrono::Utc::now().to_rfc3339(),
            seeds: self.seeds.clone(),
            seed_source: if self.seeds.is_empty() { "none" } else { self.seed_source }.into(),
            inputs: inputs.iter().map(|p| file_provenance(p)).collect::<Result<_>>()?,
            outputs,
        })
    }

    fn write_manifest(&self, path: &Path, inputs: &[&Path], outputs: Vec<PathBuf>) -> Result<()> {
        let m = self.manifest(inputs, outputs)?;
        std::fs::write(path, serde_json::to_string_pretty(&m)? + "\n").map_err(|e| Error::io(path, e))
    }

    /// Resolve an optional seed flag, drawing from entropy when absent.
    fn seed(&mut self, name: &str, flag: &str, given: Option<u64>) -> u64 {
        let seed = given.unwrap_or_else(|| {
            self.seed_source = "entropy";
            let s = entropy_seed();
            self.pinned.extend([flag.to_owned(), s.to_string()]);
            s
        });
        self.seeds.insert(name.into(), seed);
        seed
    }
}

fn entropy_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos() as u64);
    derive_seed(&[nanos, std::process::id() as u64])
}

fn file_manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn ensure_parent(file: &Path) -> Result<()> {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => ensure_dir(p),
        _ => Ok(()),
    }
}

/// Refuse to overwrite any of `paths` unless `force`.
fn check_clobber(paths: &[PathBuf], force: bool) -> Result<()> {
    if force {
        return Ok(());
    }
    if let Some(p) = paths.iter().find(|p| p.exists()) {
        return Err(Error::Invalid(format!(
            "{} already exists; pass --force to overwrite",
            p.display()
        )));
    }
    Ok(())
}

/// Parse arguments, run, and return the process exit code.
pub fn main() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();
    let argv = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, argv) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn dispatch(cmd: Command, argv: Vec<String>) -> Result<i32> {
    let name = match &cmd {
        Command::SplitTasks(_) => "split-tasks",
        Command::Split(_) => "split",
        Command::Featurize(_) => "featurize",
        Command::Train(_) => "train",
        Command::Eval(_) => "eval",
        Command::Grid(_) => "grid",
        Command::Report(_) => "report",
        Command::InspectEmbeddings(_) => "inspect-embeddings",
    };
    let mut ctx = Ctx {
        argv,
        command: name,
        seeds: BTreeMap::new(),
        seed_source: "flag",
        pinned: Vec::new(),
    };
    match cmd {
        Command::SplitTasks(a) => split_tasks(&mut ctx, a),
        Command::Split(a) => split(&mut ctx, a),
        Command::Featurize(a) => featurize_cmd(&mut ctx, a),
        Command::Train(a) => train(&mut ctx, a),
        Command::Eval(a) => eval(&mut ctx, a),
        Command::Grid(a) => grid(&mut ctx, a),
        Command::Report(a) => report(&mut ctx, a),
        Command::InspectEmbeddings(a) => inspect(&mut ctx, a),
    }
}

fn split_tasks(ctx: &mut Ctx, a: SplitTasksArgs) -> Result<i32> {
    let source = corpus::load_source(&a.source, input_format(&a.source, a.input_format))?;
    let (dc, dr, dcr) = corpus::build_tasks(&source)?;
    let fmt: Format = a.format.into();
    let targets: Vec<PathBuf> = ["DC", "DR", "DCR"]
        .iter()
        .map(|n| a.out.join(format!("{n}.{}", ext(fmt))))
        .chain(std::iter::once(a.out.join("run-manifest.json")))
        .collect();
    check_clobber(&targets, a.force)?;
    ensure_dir(&a.out)?;
    for (c, p) in [&dc, &dr, &dcr].into_iter().zip(&targets) {
        corpus::write_documents(p, c.documents(), fmt)?;
        println!("{}\t{}\t{}", c.name, c.len(), p.display());
    }
    ctx.write_manifest(&targets[3], &[&a.source], targets[..3].to_vec())?;
    Ok(EXIT_OK)
}

fn split(ctx: &mut Ctx, a: SplitArgs) -> Result<i32> {
    let corpus = corpus::load_corpus(&a.corpus, input_format(&a.corpus, a.input_format))?;
    let seed = ctx.seed("split", "--seed", a.seed);
    let s = corpus::one_shot_split(&corpus, seed)?;
    let fmt: Format = a.format.into();
    let targets = vec![
        a.out.join(format!("support.{}", ext(fmt))),
        a.out.join(format!("query.{}", ext(fmt))),
        a.out.join("run-manifest.json"),
    ];
    check_clobber(&targets, a.force)?;
    ensure_dir(&a.out)?;
    corpus::write_documents(&targets[0], &s.support, fmt)?;
    corpus::write_documents(&targets[1], &s.query, fmt)?;
    println!("seed\t{seed}\nsupport\t{}\nquery\t{}", s.support.len(), s.query.len());
    ctx.write_manifest(&targets[2], &[&a.corpus], targets[..2].to_vec())?;
    Ok(EXIT_OK)
}

fn featurizer_spec(a: &FeaturizeArgs) -> Result<FeaturizerSpec> {
    let need = || {
        a.resource
            .clone()
            .ok_or_else(|| Error::Invalid("--resource is required for this featurizer".into()))
    };
    let kind = match a.kind {
        FeaturizerArg::Bow => FeaturizerKind::Bow,
        FeaturizerArg::CharNgrams => FeaturizerKind::CharNgrams {
            n_min: a.n_min.unwrap_or(2),
            n_max: a.n_max.unwrap_or(4),
        },
        FeaturizerArg::Word2vec => FeaturizerKind::Word2vec {
            path: need()?,
            binary: a.binary,
        },
        FeaturizerArg::Glove => FeaturizerKind::Glove { path: need()? },
        FeaturizerArg::Fasttext => FeaturizerKind::Fasttext {
            path: need()?,
            buckets_path: a.buckets.clone(),
            bucket_count: a.bucket_count,
            n_min: a.n_min.unwrap_or(embedio::DEFAULT_SUBWORD_MIN),
            n_max: a.n_max.unwrap_or(embedio::DEFAULT_SUBWORD_MAX),
            bucket_seed: a.bucket_seed,
        },
        FeaturizerArg::DocVectors => FeaturizerKind::DocVectors { path: need()? },
    };
    Ok(FeaturizerSpec::new(kind))
}

fn featurize_cmd(ctx: &mut Ctx, a: FeaturizeArgs) -> Result<i32> {
    let spec = featurizer_spec(&a)?;
    let target = corpus::load_documents(&a.corpus, Format::from_path(&a.corpus))?;
    let fit_docs = match &a.fit_on {
        Some(p) => corpus::load_documents(p, Format::from_path(p))?,
        None => target.clone(),
    };
    let vocab = featurize::corpus_vocabulary(target.iter().chain(&fit_docs), &spec.norm);
    let fitted = spec.load(Some(&vocab))?.fit(&fit_docs)?;
    let m = fitted.transform(&target)?;
    ensure_parent(&a.out)?;
    featurize::write_matrix_jsonl(&m, &a.out)?;
    println!("rows\t{}\ncols\t{}\nzero_rows\t{}", m.n_rows(), m.n_cols(), m.zero_rows().len());
    let mut inputs: Vec<&Path> = vec![&a.corpus];
    inputs.extend(a.fit_on.as_deref());
    inputs.extend(spec.kind.resource_paths());
    ctx.write_manifest(&file_manifest_path(&a.out), &inputs, vec![a.out.clone()])?;
    Ok(EXIT_OK)
}

/// `KEY=VALUE` overrides on top of the kind's defaults; values are read as
/// JSON when possible and as strings otherwise.
fn classifier_spec(kind: ModelKind, params: &[String], seed: u64) -> Result<ClassifierSpec> {
    let mut obj = serde_json::Map::new();
    obj.insert("kind".into(), kind.as_str().into());
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("--param {p:?} is not KEY=VALUE")))?;
        let v = serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.to_owned()));
        obj.insert(k.trim().to_owned(), v);
    }
    let mut spec: ClassifierSpec = serde_json::from_value(obj.into())
        .map_err(|e| Error::Hyperparameter(format!("{kind}: {e}")))?;
    spec.seed = Some(seed);
    Ok(spec)
}

fn labels_for(matrix: &featurize::FeatureMatrix, corpus_path: &Path) -> Result<Vec<String>> {
    let docs = corpus::load_documents(corpus_path, Format::from_path(corpus_path))?;
    let by_id: std::collections::HashMap<&str, &str> =
        docs.iter().map(|d| (d.id.as_str(), d.label.as_str())).collect();
    matrix
        .row_ids()
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .map(|l| l.to_string())
                .ok_or_else(|| Error::Invalid(format!("matrix row {id:?} not found in {}", corpus_path.display())))
        })
        .collect()
}

fn train(ctx: &mut Ctx, a: TrainArgs) -> Result<i32> {
    let seed = ctx.seed("model", "--seed", a.seed);
    let spec = classifier_spec(a.model, &a.params, seed)?;
    let x = featurize::read_matrix_jsonl(&a.matrix)?;
    let y = labels_for(&x, &a.corpus)?;
    let model = classify::train(&spec, &x, &y)?;
    ensure_parent(&a.out)?;
    model.save(&a.out)?;
    let acc = model
        .predict(&x)?
        .iter()
        .zip(&y)
        .filter(|(p, t)| p == t)
        .count() as f64
        / y.len() as f64;
    println!(
        "model\t{}\nclasses\t{}\ntraining_accuracy\t{}",
        model.kind,
        model.class_labels.join(","),
        experiment::format_4dp(acc)
    );
    for w in &model.diagnostics.warnings {
        log::warn!("{w}");
    }
    ctx.write_manifest(&file_manifest_path(&a.out), &[&a.matrix, &a.corpus], vec![a.out.clone()])?;
    Ok(EXIT_OK)
}

fn eval(ctx: &mut Ctx, a: EvalArgs) -> Result<i32> {
    let model = TrainedModel::load(&a.model)?;
    let x = featurize::read_matrix_jsonl(&a.matrix)?;
    let y = labels_for(&x, &a.corpus)?;
    let pred = model.predict(&x)?;
    let r = metrics::evaluate_with(&y, &pred, &model.class_labels, a.averaging.into())?;
    println!(
        "accuracy\t{}\nprecision\t{}\nrecall\t{}\nf1\t{}\naveraging\t{}\nzero_division\t{}",
        experiment::format_4dp(r.accuracy),
        experiment::format_4dp(r.precision),
        experiment::format_4dp(r.recall),
        experiment::format_4dp(r.f1),
        r.averaging,
        r.zero_division
    );
    if let Some(out) = &a.out {
        ensure_parent(out)?;
        std::fs::write(out, serde_json::to_string_pretty(&r)? + "\n").map_err(|e| Error::io(out, e))?;
        ctx.write_manifest(
            &file_manifest_path(out),
            &[&a.model, &a.matrix, &a.corpus],
            vec![out.clone()],
        )?;
    }
    Ok(EXIT_OK)
}

fn grid(ctx: &mut Ctx, a: GridArgs) -> Result<i32> {
    let mut cfg = GridConfig::load(&a.config)?;
    if a.single_seed {
        cfg.repeats = 1;
    }
    if let Some(r) = a.repeats {
        cfg.repeats = r;
    }
    if let Some(j) = a.jobs {
        cfg.jobs = Some(j);
    }
    if let Some(o) = a.out {
        cfg.output_dir = o;
    }
    let given = a.seed.or(cfg.base_seed);
    if a.seed.is_none() && cfg.base_seed.is_some() {
        ctx.seed_source = "config";
    }
    cfg.base_seed = Some(ctx.seed("base_seed", "--seed", given));
    cfg.validate()?;
    let result = experiment::run_grid(&cfg)?;
    let out = cfg.output_dir.clone();
    let written = experiment::write_reports(&result, &out)?;
    let failed = result.failed_cells().count();
    println!(
        "cells\t{}\nfailed\t{failed}\nrepeats\t{}\noutput\t{}",
        result.cells.len(),
        cfg.repeats,
        out.display()
    );
    for c in result.failed_cells() {
        eprintln!(
            "failed cell: {} / {} / {}: {}",
            c.dataset,
            c.featurizer,
            c.model,
            c.error.as_deref().unwrap_or("")
        );
    }
    let mut inputs: Vec<&Path> = vec![&a.config];
    inputs.extend(cfg.datasets.iter().map(|d| d.path.as_path()));
    inputs.extend(cfg.featurizers.iter().flat_map(|f| f.kind.resource_paths()));
    ctx.write_manifest(&out.join("run-manifest.json"), &inputs, written)?;
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

fn report(ctx: &mut Ctx, a: ReportArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&a.grid).map_err(|e| Error::io(&a.grid, e))?;
    let result = GridResult::from_json(&text)?;
    let written = experiment::write_reports(&result, &a.out)?;
    for p in &written {
        println!("{}", p.display());
    }
    ctx.write_manifest(&a.out.join("run-manifest.json"), &[&a.grid], written)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct WordReport {
    word: String,
    in_vocabulary: bool,
    vector: Option<Vec<f64>>,
    subwords: Vec<String>,
}

fn inspect(_ctx: &mut Ctx, a: InspectArgs) -> Result<i32> {
    let out = match a.format {
        EmbeddingFormat::DocVectors => {
            let d = embedio::load_doc_vectors(&a.path)?;
            let norms: Vec<f64> = d.iter().map(|(_, v)| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
            let words: Vec<WordReport> = a
                .word
                .iter()
                .map(|w| WordReport {
                    word: w.clone(),
                    in_vocabulary: d.get(w).is_some(),
                    vector: d.get(w).map(<[f64]>::to_vec),
                    subwords: vec![],
                })
                .collect();
            serde_json::json!({
                "kind": "doc_vectors",
                "entries": d.len(),
                "dim": d.dim(),
                "mean_norm": norms.iter().sum::<f64>() / norms.len().max(1) as f64,
                "lookups": words,
            })
        }
        fmt => {
            let table = match fmt {
                EmbeddingFormat::Glove => embedio::parse_glove(&a.path)?,
                EmbeddingFormat::Word2vec => embedio::parse_word2vec(&a.path, false)?,
                EmbeddingFormat::Word2vecBinary => embedio::parse_word2vec(&a.path, true)?,
                _ => embedio::parse_fasttext_vec(&a.path)?,
            };
            let summary = embedio::summarize(&table);
            let sub = if table.source_kind() == SourceKind::Fasttext && !a.word.is_empty() {
                Some(match &a.buckets {
                    Some(b) => {
                        let (_, data) = embedio::load_buckets(b)?;
                        SubwordModel::with_buckets(
                            table.clone(),
                            data,
                            embedio::DEFAULT_SUBWORD_MIN,
                            embedio::DEFAULT_SUBWORD_MAX,
                        )?
                    }
                    None => SubwordModel::seeded(
                        table.clone(),
                        a.bucket_count,
                        embedio::DEFAULT_SUBWORD_MIN,
                        embedio::DEFAULT_SUBWORD_MAX,
                        0,
                    )?,
                })
            } else {
                None
            };
            let words: Vec<WordReport> = a
                .word
                .iter()
                .map(|w| {
                    let known = table.get(w).map(<[f64]>::to_vec);
                    let in_vocabulary = known.is_some();
                    let (vector, subwords) = match (&known, &sub) {
                        (None, Some(m)) => (m.subword_vector(w), m.subwords(w)),
                        _ => (known, vec![]),
                    };
                    WordReport {
                        word: w.clone(),
                        in_vocabulary,
                        vector,
                        subwords,
                    }
                })
                .collect();
            serde_json::json!({ "summary": summary, "lookups": words })
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(EXIT_OK)
}
