//! Labeled corpora, the three consultation tasks, and seeded one-shot splits.
//!
//! Input files are UTF-8 CSV with a header row (`id,text,label`) or JSONL
//! with one object per line using the same keys. The four-column source
//! layout (`id,doctor,chatgpt,rephrased`) feeds [`build_tasks`].
//!
//! Row numbers in errors are physical line numbers in the file, so the
//! first CSV data row is row 2.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Xoshiro256StarStar;

/// One labeled text unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: String,
}

/// On-disk corpus encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// `.jsonl`/`.json` map to JSONL, everything else to CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::Invalid(format!("unknown format {other:?} (csv|jsonl)"))),
        }
    }
}

/// A validated, ordered collection of documents.
///
/// Every label has at least two documents and ids are unique. Labels are
/// kept in lexicographic order; that order is the class order used for
/// tie-breaking everywhere downstream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corpus {
    pub name: String,
    documents: Vec<Document>,
    labels: Vec<String>,
}

impl Corpus {
    /// Validate and build a corpus; errors cite 1-based document positions.
    pub fn new(name: impl Into<String>, documents: Vec<Document>) -> Result<Corpus> {
        let rows: Vec<usize> = (1..=documents.len()).collect();
        Self::with_rows(name.into(), documents, &rows)
    }

    fn with_rows(name: String, documents: Vec<Document>, rows: &[usize]) -> Result<Corpus> {
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(documents.len());
        let mut by_label: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for (doc, &row) in documents.iter().zip(rows) {
            if doc.text.trim().is_empty() {
                return Err(Error::Record {
                    path: name.clone().into(),
                    row,
                    message: format!("document {:?} has empty text", doc.id),
                });
            }
            if let Some(&first_row) = seen.get(doc.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: doc.id.clone(),
                    first_row,
                    second_row: row,
                });
            }
            seen.insert(&doc.id, row);
            by_label.entry(&doc.label).or_insert((0, row)).0 += 1;
        }
        if let Some((label, &(count, row))) = by_label.iter().find(|(_, (c, _))| *c < 2) {
            return Err(Error::SingletonLabel {
                label: label.to_string(),
                count,
                row,
            });
        }
        let labels = by_label.keys().map(|l| l.to_string()).collect();
        Ok(Corpus {
            name,
            documents,
            labels,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    /// Distinct labels, sorted.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Number of documents carrying each label, in label order.
    pub fn label_counts(&self) -> Vec<(String, usize)> {
        self.labels
            .iter()
            .map(|l| (l.clone(), self.documents.iter().filter(|d| &d.label == l).count()))
            .collect()
    }
}

/// Four-column source: each row holds the doctor's answer, the chatbot's
/// answer, and a rephrasing of the doctor's answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRow {
    pub id: String,
    pub doctor: String,
    pub chatgpt: String,
    pub rephrased: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ThreeWaySource {
    pub rows: Vec<SourceRow>,
}

pub const DOCTOR: &str = "doctor";
pub const CHATGPT: &str = "chatgpt";
pub const REPHRASED: &str = "rephrased";

/// Build the doctor/chatbot (DC), doctor/rephrased (DR), and three-way (DCR)
/// corpora. Documents are emitted row by row in role order; ids get a
/// `_<role>` suffix.
pub fn build_tasks(source: &ThreeWaySource) -> Result<(Corpus, Corpus, Corpus)> {
    if source.rows.is_empty() {
        return Err(Error::Invalid("three-way source has no rows".into()));
    }
    let doc = |row: &SourceRow, role: &str, text: &str| Document {
        id: format!("{}_{}", row.id, role),
        text: text.to_owned(),
        label: role.to_owned(),
    };
    let mut dc = Vec::with_capacity(2 * source.rows.len());
    let mut dr = Vec::with_capacity(2 * source.rows.len());
    let mut dcr = Vec::with_capacity(3 * source.rows.len());
    for row in &source.rows {
        let d = doc(row, DOCTOR, &row.doctor);
        let c = doc(row, CHATGPT, &row.chatgpt);
        let r = doc(row, REPHRASED, &row.rephrased);
        dc.push(d.clone());
        dc.push(c.clone());
        dr.push(d.clone());
        dr.push(r.clone());
        dcr.extend([d, c, r]);
    }
    // A single source row leaves every label with one document, which is a
    // valid task but not a splittable corpus, so skip the >= 2 check here.
    let unchecked = |name: &str, documents: Vec<Document>| {
        let mut labels: Vec<String> = documents.iter().map(|d| d.label.clone()).collect();
        labels.sort();
        labels.dedup();
        Corpus {
            name: name.to_owned(),
            documents,
            labels,
        }
    };
    Ok((unchecked("DC", dc), unchecked("DR", dr), unchecked("DCR", dcr)))
}

/// Support set with one document per label; everything else is the query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneShotSplit {
    pub support: Vec<Document>,
    pub query: Vec<Document>,
    pub seed: u64,
}

/// Draw one document per label uniformly at random.
///
/// Labels are visited in sorted order and, for each, `below(count)` picks
/// an index into that label's documents in file order. Support documents
/// are listed in label order; the query keeps corpus order.
pub fn one_shot_split(corpus: &Corpus, seed: u64) -> Result<OneShotSplit> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut chosen = vec![false; corpus.documents.len()];
    let mut support = Vec::with_capacity(corpus.labels.len());
    for label in &corpus.labels {
        let members: Vec<usize> = corpus
            .documents
            .iter()
            .enumerate()
            .filter(|(_, d)| &d.label == label)
            .map(|(i, _)| i)
            .collect();
        if members.len() < 2 {
            return Err(Error::SingletonLabel {
                label: label.clone(),
                count: members.len(),
                row: members.first().map_or(0, |i| i + 1),
            });
        }
        let pick = members[rng.index(members.len())];
        chosen[pick] = true;
        support.push(corpus.documents[pick].clone());
    }
    let query = corpus
        .documents
        .iter()
        .zip(&chosen)
        .filter(|(_, &c)| !c)
        .map(|(d, _)| d.clone())
        .collect();
    Ok(OneShotSplit {
        support,
        query,
        seed,
    })
}

#[derive(Deserialize)]
struct RawDoc {
    id: Option<String>,
    text: Option<String>,
    label: Option<String>,
}

#[derive(Deserialize)]
struct RawSource {
    id: Option<String>,
    doctor: Option<String>,
    chatgpt: Option<String>,
    rephrased: Option<String>,
}

fn require(path: &Path, row: usize, field: &str, value: Option<String>) -> Result<String> {
    value.ok_or_else(|| Error::Record {
        path: path.to_owned(),
        row,
        message: format!("missing field {field:?}"),
    })
}

/// Read records of type `T` with their line numbers.
fn read_records<T: for<'de> Deserialize<'de>>(path: &Path, format: Format) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    match format {
        Format::Csv => {
            let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
            let headers = reader.headers().map_err(|e| csv_error(path, 1, e))?.clone();
            let mut record = csv::StringRecord::new();
            loop {
                let row = reader.position().line() as usize;
                match reader.read_record(&mut record) {
                    Ok(false) => break,
                    Ok(true) => {
                        let row = record.position().map_or(row, |p| p.line() as usize);
                        let value: T = record
                            .deserialize(Some(&headers))
                            .map_err(|e| csv_error(path, row, e))?;
                        out.push((row, value));
                    }
                    Err(e) => return Err(csv_error(path, row, e)),
                }
            }
        }
        Format::Jsonl => {
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let value: T = serde_json::from_str(&line).map_err(|e| Error::Record {
                    path: path.to_owned(),
                    row: i + 1,
                    message: e.to_string(),
                })?;
                out.push((i + 1, value));
            }
        }
    }
    Ok(out)
}

fn csv_error(path: &Path, row: usize, e: csv::Error) -> Error {
    if let csv::ErrorKind::Io(_) = e.kind() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return Error::io(path, io);
        }
        unreachable!()
    }
    Error::Record {
        path: path.to_owned(),
        row,
        message: e.to_string(),
    }
}

/// Load a labeled corpus. The corpus name is the file stem.
pub fn load_corpus(path: impl AsRef<Path>, format: Format) -> Result<Corpus> {
    let path = path.as_ref();
    let (docs, rows) = read_documents(path, format)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("corpus")
        .to_owned();
    Corpus::with_rows(name, docs, &rows)
}

/// Load labeled documents without the corpus checks on label counts and ids,
/// e.g. a support set holding one document per label.
pub fn load_documents(path: impl AsRef<Path>, format: Format) -> Result<Vec<Document>> {
    read_documents(path.as_ref(), format).map(|(d, _)| d)
}

fn read_documents(path: &Path, format: Format) -> Result<(Vec<Document>, Vec<usize>)> {
    let records: Vec<(usize, RawDoc)> = read_records(path, format)?;
    let mut docs = Vec::with_capacity(records.len());
    let mut rows = Vec::with_capacity(records.len());
    for (row, raw) in records {
        let id = require(path, row, "id", raw.id)?;
        let text = require(path, row, "text", raw.text)?;
        let label = require(path, row, "label", raw.label)?;
        if text.trim().is_empty() {
            return Err(Error::Record {
                path: path.to_owned(),
                row,
                message: format!("document {id:?} has empty text"),
            });
        }
        docs.push(Document { id, text, label });
        rows.push(row);
    }
    Ok((docs, rows))
}

/// Load the four-column source used by [`build_tasks`].
pub fn load_source(path: impl AsRef<Path>, format: Format) -> Result<ThreeWaySource> {
    let path = path.as_ref();
    let records: Vec<(usize, RawSource)> = read_records(path, format)?;
    let mut rows = Vec::with_capacity(records.len());
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (row, raw) in records {
        let r = SourceRow {
            id: require(path, row, "id", raw.id)?,
            doctor: require(path, row, "doctor", raw.doctor)?,
            chatgpt: require(path, row, "chatgpt", raw.chatgpt)?,
            rephrased: require(path, row, "rephrased", raw.rephrased)?,
        };
        for (field, text) in [(DOCTOR, &r.doctor), (CHATGPT, &r.chatgpt), (REPHRASED, &r.rephrased)] {
            if text.trim().is_empty() {
                return Err(Error::Record {
                    path: path.to_owned(),
                    row,
                    message: format!("empty {field} text for id {:?}", r.id),
                });
            }
        }
        if let Some(first_row) = seen.insert(r.id.clone(), row) {
            return Err(Error::DuplicateId {
                id: r.id,
                first_row,
                second_row: row,
            });
        }
        rows.push(r);
    }
    if rows.is_empty() {
        return Err(Error::Record {
            path: path.to_owned(),
            row: 1,
            message: "source has no data rows".into(),
        });
    }
    Ok(ThreeWaySource { rows })
}

/// Write documents as CSV (`id,text,label`) or JSONL.
pub fn write_documents(path: impl AsRef<Path>, docs: &[Document], format: Format) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(file);
            for d in docs {
                w.serialize(d).map_err(|e| csv_error(path, 0, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        Format::Jsonl => {
            let mut w = std::io::BufWriter::new(file);
            for d in docs {
                serde_json::to_writer(&mut w, d)?;
                w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

/// Write a four-column source file.
pub fn write_source(path: impl AsRef<Path>, source: &ThreeWaySource, format: Format) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(file);
            for r in &source.rows {
                w.serialize(r).map_err(|e| csv_error(path, 0, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        Format::Jsonl => {
            let mut w = std::io::BufWriter::new(file);
            for r in &source.rows {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}
