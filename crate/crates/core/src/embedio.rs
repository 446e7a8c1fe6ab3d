//! Pretrained word-vector files, hashed-subword OOV vectors, and
//! precomputed document vectors.
//!
//! Supported formats:
//!
//! * GloVe text: `token v1 v2 ... vd` per line, no header.
//! * Word2Vec / fastText `.vec` text: header `<count> <dim>`, then `count`
//!   lines in the GloVe layout.
//! * Word2Vec binary: header line `<count> <dim>\n`, then per entry the
//!   token bytes, one space, and `dim` little-endian `f32`s. A newline after
//!   each vector is written and tolerated on read.
//! * Document vectors: JSONL, `{"id": "...", "vector": [f64, ...]}` per line.
//! * Subword bucket sidecar: header `<bucket_count> <dim>`, then one line of
//!   `dim` floats per bucket, in bucket order.
//!
//! Text writers print floats in shortest round-trip form, so text formats
//! survive write/parse bit-exactly.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, Xoshiro256StarStar};
use crate::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Glove,
    Word2vec,
    Fasttext,
}

/// Token to vector map with a fixed dimension.
///
/// Vectors are stored contiguously in insertion (file) order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    source_kind: SourceKind,
    tokens: Vec<String>,
    data: Vec<f64>,
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, source_kind: SourceKind) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        EmbeddingTable {
            dim,
            source_kind,
            tokens: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Insert a vector. Fails on duplicate tokens, wrong length, or
    /// non-finite components.
    pub fn insert(&mut self, token: impl Into<String>, vector: &[f64]) -> Result<()> {
        let token = token.into();
        if vector.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite component in vector for {token:?}")));
        }
        if self.index.contains_key(&token) {
            return Err(Error::Invalid(format!("duplicate token {token:?}")));
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source_kind(&self) -> SourceKind {
        self.source_kind
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.tokens
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(t, v)| (t.as_str(), v))
    }
}

/// Options shared by the word-vector parsers.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Keep only these tokens. Dimensions of skipped lines are still
    /// checked.
    pub vocab_filter: Option<HashSet<String>>,
}

impl LoadOptions {
    fn keep(&self, token: &str) -> bool {
        self.vocab_filter.as_ref().is_none_or(|f| f.contains(token))
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn emb_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Embedding {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

fn parse_floats<'a>(
    path: &Path,
    line: usize,
    fields: impl Iterator<Item = &'a str>,
    out: &mut Vec<f64>,
) -> Result<()> {
    out.clear();
    for f in fields {
        let v: f64 = f
            .parse()
            .map_err(|_| emb_err(path, line, format!("unparsable float {f:?}")))?;
        if !v.is_finite() {
            return Err(emb_err(path, line, format!("non-finite value {f:?}")));
        }
        out.push(v);
    }
    Ok(())
}

/// Parse one `token v1 ... vd` line into `table` (creating it on first use).
#[allow(clippy::too_many_arguments)]
fn add_text_line(
    path: &Path,
    line_no: usize,
    line: &str,
    kind: SourceKind,
    expected_dim: Option<usize>,
    table: &mut Option<EmbeddingTable>,
    opts: &LoadOptions,
    scratch: &mut Vec<f64>,
) -> Result<()> {
    let mut fields = line.split_ascii_whitespace();
    let token = fields
        .next()
        .ok_or_else(|| emb_err(path, line_no, "empty line"))?;
    let dim = fields.clone().count();
    if dim == 0 {
        return Err(emb_err(path, line_no, format!("no vector for token {token:?}")));
    }
    let want = expected_dim.or(table.as_ref().map(|t| t.dim)).unwrap_or(dim);
    if dim != want {
        return Err(emb_err(
            path,
            line_no,
            format!("inconsistent dimension: expected {want}, found {dim}"),
        ));
    }
    let table = table.get_or_insert_with(|| EmbeddingTable::new(dim, kind));
    if !opts.keep(token) {
        return Ok(());
    }
    parse_floats(path, line_no, fields, scratch)?;
    if table.index.contains_key(token) {
        return Err(emb_err(path, line_no, format!("duplicate token {token:?}")));
    }
    table.insert(token, scratch)
}

pub fn parse_glove(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    parse_glove_with(path, &LoadOptions::default())
}

/// GloVe text; the dimension comes from the first line.
pub fn parse_glove_with(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let reader = BufReader::new(open(path)?);
    let mut table = None;
    let mut scratch = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        add_text_line(path, i + 1, &line, SourceKind::Glove, None, &mut table, opts, &mut scratch)?;
    }
    table.ok_or_else(|| emb_err(path, 1, "file contains no vectors"))
}

fn parse_header(path: &Path, line: &str) -> Result<(usize, usize)> {
    let mut parts = line.split_ascii_whitespace();
    let parsed = (|| {
        let count = parts.next()?.parse().ok()?;
        let dim = parts.next()?.parse().ok()?;
        parts.next().is_none().then_some((count, dim))
    })();
    match parsed {
        Some((count, dim)) if dim > 0 => Ok((count, dim)),
        _ => Err(emb_err(path, 1, format!("bad header {line:?}, expected \"<count> <dim>\""))),
    }
}

fn parse_vec_text(path: &Path, kind: SourceKind, opts: &LoadOptions) -> Result<EmbeddingTable> {
    let mut lines = BufReader::new(open(path)?).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(emb_err(path, 1, "missing header")),
    };
    let (count, dim) = parse_header(path, &header)?;
    let mut table = Some(EmbeddingTable::new(dim, kind));
    let mut scratch = Vec::with_capacity(dim);
    let mut seen = 0usize;
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 2;
        if seen == count {
            return Err(emb_err(
                path,
                line_no,
                format!("header declares {count} entries but more follow"),
            ));
        }
        add_text_line(path, line_no, &line, kind, Some(dim), &mut table, opts, &mut scratch)?;
        seen += 1;
    }
    if seen != count {
        return Err(emb_err(
            path,
            seen + 2,
            format!("truncated: header declares {count} entries, found {seen}"),
        ));
    }
    Ok(table.expect("table created from header"))
}

pub fn parse_word2vec(path: impl AsRef<Path>, binary: bool) -> Result<EmbeddingTable> {
    parse_word2vec_with(path, binary, &LoadOptions::default())
}

pub fn parse_word2vec_with(
    path: impl AsRef<Path>,
    binary: bool,
    opts: &LoadOptions,
) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    if binary {
        parse_word2vec_binary(path, opts)
    } else {
        parse_vec_text(path, SourceKind::Word2vec, opts)
    }
}

pub fn parse_fasttext_vec(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    parse_fasttext_vec_with(path, &LoadOptions::default())
}

pub fn parse_fasttext_vec_with(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<EmbeddingTable> {
    parse_vec_text(path.as_ref(), SourceKind::Fasttext, opts)
}

fn parse_word2vec_binary(path: &Path, opts: &LoadOptions) -> Result<EmbeddingTable> {
    let mut reader = BufReader::new(open(path)?);
    let mut header = String::new();
    reader
        .read_line(&mut header)
        .map_err(|e| Error::io(path, e))?;
    let (count, dim) = parse_header(path, header.trim_end())?;
    let mut table = EmbeddingTable::new(dim, SourceKind::Word2vec);
    let mut vector = vec![0f64; dim];
    let mut token = Vec::new();
    for entry in 0..count {
        // "line" in errors is the 1-based entry number plus the header.
        let line_no = entry + 2;
        token.clear();
        loop {
            let mut byte = [0u8; 1];
            match reader.read(&mut byte) {
                Ok(0) => {
                    return Err(emb_err(
                        path,
                        line_no,
                        format!("truncated: header declares {count} entries, found {entry}"),
                    ))
                }
                Ok(_) => {}
                Err(e) => return Err(Error::io(path, e)),
            }
            match byte[0] {
                b' ' if !token.is_empty() => break,
                b'\n' | b'\r' if token.is_empty() => continue,
                b => token.push(b),
            }
        }
        let word = String::from_utf8(token.clone())
            .map_err(|_| emb_err(path, line_no, "token is not valid UTF-8"))?;
        for v in vector.iter_mut() {
            let x = reader.read_f32::<LittleEndian>().map_err(|e| {
                if e.kind() == std::io::ErrorKind::UnexpectedEof {
                    emb_err(path, line_no, format!("truncated vector payload for {word:?}"))
                } else {
                    Error::io(path, e)
                }
            })?;
            if !x.is_finite() {
                return Err(emb_err(path, line_no, format!("non-finite value in {word:?}")));
            }
            *v = f64::from(x);
        }
        if opts.keep(&word) {
            if table.get(&word).is_some() {
                return Err(emb_err(path, line_no, format!("duplicate token {word:?}")));
            }
            table.insert(word, &vector)?;
        }
    }
    let mut rest = Vec::new();
    reader
        .read_to_end(&mut rest)
        .map_err(|e| Error::io(path, e))?;
    if rest.iter().any(|b| !b.is_ascii_whitespace()) {
        return Err(emb_err(
            path,
            count + 2,
            format!("header declares {count} entries but more data follows"),
        ));
    }
    Ok(table)
}

fn write_text_body(w: &mut impl Write, table: &EmbeddingTable, path: &Path) -> Result<()> {
    let mut line = String::new();
    for (token, vector) in table.iter() {
        line.clear();
        line.push_str(token);
        for v in vector {
            write!(line, " {v}").expect("write to String");
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub fn write_glove(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    write_text_body(&mut w, table, path)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Word2Vec text layout; also the fastText `.vec` layout.
pub fn write_word2vec_text(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "{} {}", table.len(), table.dim()).map_err(|e| Error::io(path, e))?;
    write_text_body(&mut w, table, path)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_fasttext_vec(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    write_word2vec_text(table, path)
}

/// Word2Vec binary layout. Components are narrowed to `f32`.
pub fn write_word2vec_binary(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{} {}", table.len(), table.dim()).map_err(io)?;
    for (token, vector) in table.iter() {
        w.write_all(token.as_bytes()).map_err(io)?;
        w.write_all(b" ").map_err(io)?;
        for &v in vector {
            w.write_f32::<LittleEndian>(v as f32).map_err(io)?;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// 32-bit FNV-1a over bytes.
pub fn fnv1a_32(bytes: &[u8]) -> u32 {
    let mut hash = 0x811C_9DC5u32;
    for &b in bytes {
        hash ^= u32::from(b);
        hash = hash.wrapping_mul(0x0100_0193);
    }
    hash
}

/// Where bucket vectors come from.
#[derive(Debug, Clone, PartialEq)]
pub enum BucketVectors {
    /// Explicit `bucket_count x dim` row-major storage (sidecar file).
    Stored(Vec<f64>),
    /// Unit-norm pseudo-random vectors generated on demand: bucket `b` is
    /// a normalized vector of `dim` standard normals drawn from
    /// `Xoshiro256StarStar::seed_from_u64(derive_seed(&[seed, b]))`.
    Seeded { seed: u64 },
}

pub const DEFAULT_BUCKET_COUNT: usize = 2_000_000;
pub const DEFAULT_SUBWORD_MIN: usize = 3;
pub const DEFAULT_SUBWORD_MAX: usize = 6;

/// Word table plus hashed subword buckets for out-of-vocabulary words.
#[derive(Debug, Clone)]
pub struct SubwordModel {
    pub table: EmbeddingTable,
    buckets: BucketVectors,
    bucket_count: usize,
    n_min: usize,
    n_max: usize,
}

impl SubwordModel {
    /// Buckets generated from a seed; nothing is materialized up front.
    pub fn seeded(table: EmbeddingTable, bucket_count: usize, n_min: usize, n_max: usize, seed: u64) -> Result<Self> {
        Self::check(bucket_count, n_min, n_max)?;
        Ok(SubwordModel {
            table,
            buckets: BucketVectors::Seeded { seed },
            bucket_count,
            n_min,
            n_max,
        })
    }

    /// Buckets given explicitly, `bucket_count x table.dim()` row-major.
    pub fn with_buckets(table: EmbeddingTable, buckets: Vec<f64>, n_min: usize, n_max: usize) -> Result<Self> {
        let dim = table.dim();
        if buckets.is_empty() || !buckets.len().is_multiple_of(dim) {
            return Err(Error::Invalid(format!(
                "bucket storage of length {} is not a positive multiple of dim {dim}",
                buckets.len()
            )));
        }
        if buckets.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite bucket vector component".into()));
        }
        let bucket_count = buckets.len() / dim;
        Self::check(bucket_count, n_min, n_max)?;
        Ok(SubwordModel {
            table,
            buckets: BucketVectors::Stored(buckets),
            bucket_count,
            n_min,
            n_max,
        })
    }

    fn check(bucket_count: usize, n_min: usize, n_max: usize) -> Result<()> {
        if bucket_count == 0 {
            return Err(Error::Invalid("bucket_count must be positive".into()));
        }
        if bucket_count > u32::MAX as usize + 1 {
            return Err(Error::Invalid("bucket_count exceeds the 32-bit hash range".into()));
        }
        tokenize::check_ngram_range(n_min, n_max)
    }

    pub fn bucket_count(&self) -> usize {
        self.bucket_count
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        (self.n_min, self.n_max)
    }

    pub fn buckets(&self) -> &BucketVectors {
        &self.buckets
    }

    /// Bucket index of one subword string.
    pub fn bucket_of(&self, ngram: &str) -> usize {
        fnv1a_32(ngram.as_bytes()) as usize % self.bucket_count
    }

    /// Add bucket `b`'s vector into `acc`.
    fn add_bucket(&self, b: usize, acc: &mut [f64]) {
        let dim = self.table.dim();
        match &self.buckets {
            BucketVectors::Stored(data) => {
                for (a, v) in acc.iter_mut().zip(&data[b * dim..(b + 1) * dim]) {
                    *a += v;
                }
            }
            BucketVectors::Seeded { seed } => {
                for (a, v) in acc.iter_mut().zip(seeded_bucket(*seed, b, dim)) {
                    *a += v;
                }
            }
        }
    }

    pub fn bucket_vector(&self, b: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.table.dim()];
        self.add_bucket(b, &mut v);
        v
    }

    /// Subword strings of an out-of-vocabulary word: n-grams of `<word>`.
    pub fn subwords(&self, word: &str) -> Vec<String> {
        tokenize::windows(&format!("<{word}>"), self.n_min, self.n_max)
    }

    /// Stored vector for known words; otherwise the mean of the bucket
    /// vectors hit by the word's subwords. `None` only when the wrapped word
    /// yields no n-grams.
    pub fn subword_vector(&self, word: &str) -> Option<Vec<f64>> {
        if let Some(v) = self.table.get(word) {
            return Some(v.to_vec());
        }
        let grams = self.subwords(word);
        if grams.is_empty() {
            return None;
        }
        let mut acc = vec![0.0; self.table.dim()];
        for g in &grams {
            self.add_bucket(self.bucket_of(g), &mut acc);
        }
        let n = grams.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Some(acc)
    }
}

/// Free-function form of [`SubwordModel::subword_vector`].
pub fn subword_vector(model: &SubwordModel, word: &str) -> Option<Vec<f64>> {
    model.subword_vector(word)
}

fn seeded_bucket(seed: u64, bucket: usize, dim: usize) -> Vec<f64> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(&[seed, bucket as u64]));
    let mut v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Read a bucket sidecar file (see module docs). Returns `(dim, data)`.
pub fn load_buckets(path: impl AsRef<Path>) -> Result<(usize, Vec<f64>)> {
    let path = path.as_ref();
    let mut lines = BufReader::new(open(path)?).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(emb_err(path, 1, "missing header")),
    };
    let (count, dim) = parse_header(path, &header)?;
    let mut data = Vec::with_capacity(count * dim);
    let mut row = Vec::with_capacity(dim);
    let mut seen = 0;
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        parse_floats(path, i + 2, line.split_ascii_whitespace(), &mut row)?;
        if row.len() != dim {
            return Err(emb_err(
                path,
                i + 2,
                format!("inconsistent dimension: expected {dim}, found {}", row.len()),
            ));
        }
        data.extend_from_slice(&row);
        seen += 1;
    }
    if seen != count {
        return Err(emb_err(
            path,
            seen + 2,
            format!("header declares {count} buckets, found {seen}"),
        ));
    }
    Ok((dim, data))
}

pub fn write_buckets(dim: usize, data: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{} {}", data.len() / dim, dim).map_err(io)?;
    let mut line = String::new();
    for row in data.chunks_exact(dim) {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            write!(line, "{v}").expect("write to String");
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Precomputed per-document vectors keyed by document id.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVectorFile {
    dim: usize,
    ids: Vec<String>,
    rows: HashMap<String, Vec<f64>>,
}

impl DocVectorFile {
    pub fn new(dim: usize) -> Self {
        DocVectorFile {
            dim,
            ids: Vec::new(),
            rows: HashMap::new(),
        }
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let id = id.into();
        if vector.len() != self.dim {
            return Err(Error::DocVector {
                id,
                message: format!("dimension {} differs from {}", vector.len(), self.dim),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::DocVector {
                id,
                message: "non-finite value".into(),
            });
        }
        if self.rows.contains_key(&id) {
            return Err(Error::DocVector {
                id,
                message: "duplicate id".into(),
            });
        }
        self.ids.push(id.clone());
        self.rows.insert(id, vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.rows.get(id).map(Vec::as_slice)
    }

    /// Rows in file order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids.iter().map(|id| (id.as_str(), self.rows[id].as_slice()))
    }
}

#[derive(Serialize, Deserialize)]
struct DocVectorRow {
    id: String,
    vector: Vec<Option<f64>>,
}

/// Replace bare `NaN`, `Infinity`, `-Infinity` tokens outside strings with
/// `null`, so rows written by lenient JSON emitters still name their id.
fn nullify_nonfinite(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = line;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
        }
        let token = ["-Infinity", "Infinity", "NaN"]
            .into_iter()
            .find(|t| rest.starts_with(t));
        match token {
            Some(t) => {
                out.push_str("null");
                rest = &rest[t.len()..];
            }
            None => {
                out.push(c);
                rest = &rest[c.len_utf8()..];
            }
        }
    }
    out
}

pub fn load_doc_vectors(path: impl AsRef<Path>) -> Result<DocVectorFile> {
    let path = path.as_ref();
    let reader = BufReader::new(open(path)?);
    let mut file: Option<DocVectorFile> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: DocVectorRow = serde_json::from_str(&line)
            .or_else(|_| serde_json::from_str(&nullify_nonfinite(&line)))
            .map_err(|e| emb_err(path, i + 1, e.to_string()))?;
        let vector: Option<Vec<f64>> = row.vector.iter().copied().collect();
        let vector = vector.ok_or_else(|| Error::DocVector {
            id: row.id.clone(),
            message: format!("non-finite value (line {})", i + 1),
        })?;
        if vector.is_empty() {
            return Err(Error::DocVector {
                id: row.id,
                message: "empty vector".into(),
            });
        }
        file.get_or_insert_with(|| DocVectorFile::new(vector.len()))
            .insert(row.id, vector)?;
    }
    file.ok_or_else(|| emb_err(path, 1, "file contains no vectors"))
}

pub fn write_doc_vectors(dvf: &DocVectorFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for (id, v) in dvf.iter() {
        let row = DocVectorRow {
            id: id.to_owned(),
            vector: v.iter().copied().map(Some).collect(),
        };
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Summary used by the `inspect-embeddings` command.
#[derive(Debug, Clone, Serialize)]
pub struct TableSummary {
    pub kind: SourceKind,
    pub entries: usize,
    pub dim: usize,
    pub mean_norm: f64,
    pub min_norm: f64,
    pub max_norm: f64,
}

pub fn summarize(table: &EmbeddingTable) -> TableSummary {
    let norms: Vec<f64> = table
        .iter()
        .map(|(_, v)| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let n = norms.len().max(1) as f64;
    TableSummary {
        kind: table.source_kind(),
        entries: table.len(),
        dim: table.dim(),
        mean_norm: norms.iter().sum::<f64>() / n,
        min_norm: norms.iter().copied().fold(f64::INFINITY, f64::min),
        max_norm: norms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &tempfile::TempDir, name: &str, body: &[u8]) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn glove_direct_parse() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.txt", b"a 1.0 0.0\nb 0.0 1.0\n");
        let t = parse_glove(&p).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.get("a").unwrap(), [1.0, 0.0]);
        assert_eq!(t.source_kind(), SourceKind::Glove);
    }

    #[test]
    fn glove_dimension_mismatch_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.txt", b"a 1.0 0.0\nb 0.0 1.0\nc 1.0\n");
        match parse_glove(&p).unwrap_err() {
            Error::Embedding { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn glove_bad_float_and_duplicate() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.txt", b"a 1.0 x\n");
        assert!(parse_glove(&p).unwrap_err().to_string().contains("unparsable"));
        let p = write(&dir, "g2.txt", b"a 1 2\na 3 4\n");
        assert!(parse_glove(&p).unwrap_err().to_string().contains("duplicate"));
        let p = write(&dir, "g3.txt", b"a 1 NaN\n");
        assert!(parse_glove(&p).unwrap_err().to_string().contains("non-finite"));
    }

    #[test]
    fn word2vec_text_parse() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "w.txt", b"2 2\na 1 0\nb 0 1\n");
        let t = parse_word2vec(&p, false).unwrap();
        assert_eq!((t.len(), t.dim()), (2, 2));
        assert_eq!(t.get("b").unwrap(), [0.0, 1.0]);
    }

    #[test]
    fn word2vec_header_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "w.txt", b"3 2\na 1 0\nb 0 1\n");
        assert!(parse_word2vec(&p, false)
            .unwrap_err()
            .to_string()
            .contains("truncated"));
        let p = write(&dir, "w2.txt", b"1 2\na 1 0\nb 0 1\n");
        assert!(parse_word2vec(&p, false).is_err());
    }

    #[test]
    fn fasttext_vec_kind() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "f.vec", b"2 2\na 1 0\nb 0 1\n");
        let t = parse_fasttext_vec(&p).unwrap();
        assert_eq!(t.source_kind(), SourceKind::Fasttext);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn word2vec_binary_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = b"2 2\na ".to_vec();
        body.extend_from_slice(&1f32.to_le_bytes());
        body.extend_from_slice(&0f32.to_le_bytes());
        body.extend_from_slice(b"\nb ");
        body.extend_from_slice(&1f32.to_le_bytes());
        let p = write(&dir, "w.bin", &body);
        let err = parse_word2vec(&p, true).unwrap_err().to_string();
        assert!(err.contains("truncated"), "{err}");
    }

    #[test]
    fn word2vec_binary_without_newlines() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = b"2 1\na ".to_vec();
        body.extend_from_slice(&0.5f32.to_le_bytes());
        body.extend_from_slice(b"b ");
        body.extend_from_slice(&(-2f32).to_le_bytes());
        let p = write(&dir, "w.bin", &body);
        let t = parse_word2vec(&p, true).unwrap();
        assert_eq!(t.get("a").unwrap(), [0.5]);
        assert_eq!(t.get("b").unwrap(), [-2.0]);
    }

    #[test]
    fn vocab_filter_keeps_subset() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.txt", b"a 1 0\nb 0 1\nc 1 1\n");
        let opts = LoadOptions {
            vocab_filter: Some(["a".to_string(), "c".to_string()].into_iter().collect()),
        };
        let t = parse_glove_with(&p, &opts).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.get("b").is_none());
    }

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a 32-bit test vectors.
        assert_eq!(fnv1a_32(b""), 0x811C_9DC5);
        assert_eq!(fnv1a_32(b"a"), 0xE40C_292C);
        assert_eq!(fnv1a_32(b"foobar"), 0xBF9C_F968);
    }

    fn basis_table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2, SourceKind::Fasttext);
        t.insert("a", &[1.0, 0.0]).unwrap();
        t.insert("b", &[0.0, 1.0]).unwrap();
        t
    }

    #[test]
    fn in_vocabulary_lookup() {
        let m = SubwordModel::seeded(basis_table(), 10, 3, 6, 1).unwrap();
        assert_eq!(m.subword_vector("a").unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn single_bucket_mean_is_that_bucket() {
        let m = SubwordModel::with_buckets(basis_table(), vec![0.25, -4.0], 3, 6).unwrap();
        assert_eq!(m.bucket_count(), 1);
        assert_eq!(m.subword_vector("unseen").unwrap(), vec![0.25, -4.0]);
    }

    #[test]
    fn no_ngrams_is_absent() {
        let m = SubwordModel::seeded(basis_table(), 10, 3, 6, 1).unwrap();
        assert!(m.subword_vector("").is_none());
        assert!(m.subword_vector("z").is_some());
    }

    #[test]
    fn seeded_buckets_unit_norm() {
        let m = SubwordModel::seeded(basis_table(), 1000, 3, 6, 9).unwrap();
        for b in [0, 17, 999] {
            let v = m.bucket_vector(b);
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
            assert_eq!(v, m.bucket_vector(b));
        }
    }

    #[test]
    fn bucket_sidecar_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.txt");
        let data = vec![0.1, -0.2, 3.5e-9, 7.0, 1.0 / 3.0, 2.0];
        write_buckets(2, &data, &p).unwrap();
        assert_eq!(load_buckets(&p).unwrap(), (2, data));
    }

    #[test]
    fn doc_vectors_basic_and_nan() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::new();
        for i in 0..3 {
            body.push_str(&format!("{{\"id\":\"d{i}\",\"vector\":[0,1,2,3,4,5,6,{i}]}}\n"));
        }
        let p = write(&dir, "v.jsonl", body.as_bytes());
        let f = load_doc_vectors(&p).unwrap();
        assert_eq!((f.len(), f.dim()), (3, 8));

        let p = write(&dir, "nan.jsonl", b"{\"id\":\"ok\",\"vector\":[1,2]}\n{\"id\":\"bad\",\"vector\":[NaN,1]}\n");
        match load_doc_vectors(&p).unwrap_err() {
            Error::DocVector { id, .. } => assert_eq!(id, "bad"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn doc_vectors_dimension_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "v.jsonl", b"{\"id\":\"a\",\"vector\":[1,2]}\n{\"id\":\"b\",\"vector\":[1]}\n");
        assert!(matches!(load_doc_vectors(&p), Err(Error::DocVector { ref id, .. }) if id == "b"));
        let p = write(&dir, "d.jsonl", b"{\"id\":\"a\",\"vector\":[1,2]}\n{\"id\":\"a\",\"vector\":[1,3]}\n");
        assert!(load_doc_vectors(&p).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn nullify_respects_strings() {
        assert_eq!(
            nullify_nonfinite(r#"{"id":"NaN","vector":[NaN,-Infinity,1]}"#),
            r#"{"id":"NaN","vector":[null,null,1]}"#
        );
    }
}
