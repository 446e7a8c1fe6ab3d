use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sparse row: strictly increasing column indices with their values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseRow {
    /// Build from unsorted `(column, value)` pairs, summing duplicates and
    /// dropping explicit zeros.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> SparseRow {
        pairs.sort_unstable_by_key(|p| p.0);
        let mut row = SparseRow::default();
        for (j, v) in pairs {
            if row.indices.last() == Some(&j) {
                *row.values.last_mut().expect("parallel vectors") += v;
            } else {
                row.indices.push(j);
                row.values.push(v);
            }
        }
        let keep: Vec<bool> = row.values.iter().map(|v| *v != 0.0).collect();
        if keep.iter().any(|k| !k) {
            let mut k = keep.iter();
            row.indices.retain(|_| *k.next().expect("same length"));
            row.values.retain(|v| *v != 0.0);
        }
        row
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Storage {
    Sparse(Vec<SparseRow>),
    Dense(Vec<Vec<f64>>),
}

/// Borrowed view of one matrix row.
#[derive(Debug, Clone, Copy)]
pub enum RowView<'a> {
    Sparse { indices: &'a [u32], values: &'a [f64] },
    Dense(&'a [f64]),
}

impl<'a> RowView<'a> {
    /// Value at column `j`.
    pub fn get(&self, j: usize) -> f64 {
        match self {
            RowView::Sparse { indices, values } => indices
                .binary_search(&(j as u32))
                .map_or(0.0, |k| values[k]),
            RowView::Dense(d) => d[j],
        }
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        match self {
            RowView::Sparse { indices, values } => indices
                .iter()
                .zip(values.iter())
                .map(|(&j, v)| v * w[j as usize])
                .sum(),
            RowView::Dense(d) => d.iter().zip(w).map(|(a, b)| a * b).sum(),
        }
    }

    /// Visit nonzero entries (every entry for dense rows) in column order.
    pub fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            RowView::Sparse { indices, values } => {
                for (&j, &v) in indices.iter().zip(values.iter()) {
                    f(j as usize, v);
                }
            }
            RowView::Dense(d) => {
                for (j, &v) in d.iter().enumerate() {
                    f(j, v);
                }
            }
        }
    }

    pub fn to_dense(&self, n_cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_cols];
        self.for_each(|j, v| out[j] = v);
        out
    }

    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        self.for_each(|_, v| s += v * v);
        s.sqrt()
    }
}

/// Rows of numeric features aligned to document ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    n_cols: usize,
    row_ids: Vec<String>,
    storage: Storage,
}

impl FeatureMatrix {
    pub fn sparse(n_cols: usize, row_ids: Vec<String>, rows: Vec<SparseRow>) -> Result<Self> {
        Self::new(n_cols, row_ids, Storage::Sparse(rows))
    }

    pub fn dense(n_cols: usize, row_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(n_cols, row_ids, Storage::Dense(rows))
    }

    /// Dense matrix with generated ids `r0, r1, ...`; handy for tests.
    pub fn from_dense_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let ids = (0..rows.len()).map(|i| format!("r{i}")).collect();
        Self::dense(n_cols, ids, rows)
    }

    /// Check the matrix invariants: unique ids, in-range sorted indices,
    /// consistent widths, finite values.
    pub fn new(n_cols: usize, row_ids: Vec<String>, storage: Storage) -> Result<Self> {
        let n_rows = match &storage {
            Storage::Sparse(r) => r.len(),
            Storage::Dense(r) => r.len(),
        };
        if n_rows != row_ids.len() {
            return Err(Error::Invalid(format!(
                "{} row ids for {n_rows} rows",
                row_ids.len()
            )));
        }
        let mut seen = HashSet::with_capacity(row_ids.len());
        for id in &row_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Invalid(format!("duplicate row id {id:?}")));
            }
        }
        match &storage {
            Storage::Sparse(rows) => {
                for (row, id) in rows.iter().zip(&row_ids) {
                    if row.indices.len() != row.values.len() {
                        return Err(Error::Invalid(format!("row {id:?}: index/value length mismatch")));
                    }
                    if row.indices.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(Error::Invalid(format!("row {id:?}: indices not strictly increasing")));
                    }
                    if row.indices.last().is_some_and(|&j| j as usize >= n_cols) {
                        return Err(Error::Invalid(format!("row {id:?}: column index out of range")));
                    }
                    if row.values.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Invalid(format!("row {id:?}: non-finite value")));
                    }
                }
            }
            Storage::Dense(rows) => {
                for (row, id) in rows.iter().zip(&row_ids) {
                    if row.len() != n_cols {
                        return Err(Error::Dimension {
                            expected: n_cols,
                            actual: row.len(),
                        });
                    }
                    if row.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Invalid(format!("row {id:?}: non-finite value")));
                    }
                }
            }
        }
        Ok(FeatureMatrix {
            n_cols,
            row_ids,
            storage,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn row(&self, i: usize) -> RowView<'_> {
        match &self.storage {
            Storage::Sparse(rows) => RowView::Sparse {
                indices: &rows[i].indices,
                values: &rows[i].values,
            },
            Storage::Dense(rows) => RowView::Dense(&rows[i]),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = RowView<'_>> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    /// New matrix holding rows `indices` in the given order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let row_ids = indices.iter().map(|&i| self.row_ids[i].clone()).collect();
        let storage = match &self.storage {
            Storage::Sparse(rows) => Storage::Sparse(indices.iter().map(|&i| rows[i].clone()).collect()),
            Storage::Dense(rows) => Storage::Dense(indices.iter().map(|&i| rows[i].clone()).collect()),
        };
        FeatureMatrix {
            n_cols: self.n_cols,
            row_ids,
            storage,
        }
    }

    /// Rows matching `ids`, in that order.
    pub fn select_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<FeatureMatrix> {
        let position: std::collections::HashMap<&str, usize> = self
            .row_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let indices = ids
            .iter()
            .map(|id| {
                position
                    .get(id.as_ref())
                    .copied()
                    .ok_or_else(|| Error::Invalid(format!("no feature row for id {:?}", id.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select(&indices))
    }

    /// Scale every value by `c`.
    pub fn scaled(&self, c: f64) -> FeatureMatrix {
        let storage = match &self.storage {
            Storage::Sparse(rows) => Storage::Sparse(
                rows.iter()
                    .map(|r| SparseRow {
                        indices: r.indices.clone(),
                        values: r.values.iter().map(|v| v * c).collect(),
                    })
                    .collect(),
            ),
            Storage::Dense(rows) => {
                Storage::Dense(rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect())
            }
        };
        FeatureMatrix {
            n_cols: self.n_cols,
            row_ids: self.row_ids.clone(),
            storage,
        }
    }

    /// Ids of rows with no nonzero entry.
    pub fn zero_rows(&self) -> Vec<String> {
        self.rows()
            .zip(&self.row_ids)
            .filter(|(r, _)| {
                let mut any = false;
                r.for_each(|_, v| any |= v != 0.0);
                !any
            })
            .map(|(_, id)| id.clone())
            .collect()
    }
}

/// One line of the matrix debug dump.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixLine {
    id: String,
    n_cols: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    indices: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dense: Option<Vec<f64>>,
}

/// Dump as JSONL: `{"id","n_cols","indices","values"}` for sparse rows,
/// `{"id","n_cols","dense"}` for dense rows.
pub fn write_matrix_jsonl(m: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (i, id) in m.row_ids.iter().enumerate() {
        let line = match &m.storage {
            Storage::Sparse(rows) => MatrixLine {
                id: id.clone(),
                n_cols: m.n_cols,
                indices: Some(rows[i].indices.clone()),
                values: Some(rows[i].values.clone()),
                dense: None,
            },
            Storage::Dense(rows) => MatrixLine {
                id: id.clone(),
                n_cols: m.n_cols,
                indices: None,
                values: None,
                dense: Some(rows[i].clone()),
            },
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_matrix_jsonl(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut ids = Vec::new();
    let mut sparse = Vec::new();
    let mut dense = Vec::new();
    let mut n_cols = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MatrixLine = serde_json::from_str(&line).map_err(|e| Error::Record {
            path: path.to_owned(),
            row: i + 1,
            message: e.to_string(),
        })?;
        if *n_cols.get_or_insert(rec.n_cols) != rec.n_cols {
            return Err(Error::Record {
                path: path.to_owned(),
                row: i + 1,
                message: "inconsistent n_cols".into(),
            });
        }
        match (rec.indices, rec.values, rec.dense) {
            (Some(indices), Some(values), None) => sparse.push(SparseRow { indices, values }),
            (None, None, Some(d)) => dense.push(d),
            _ => {
                return Err(Error::Record {
                    path: path.to_owned(),
                    row: i + 1,
                    message: "row must carry either indices+values or dense".into(),
                })
            }
        }
        ids.push(rec.id);
    }
    let n_cols = n_cols.unwrap_or(0);
    match (sparse.is_empty(), dense.is_empty()) {
        (_, true) => FeatureMatrix::sparse(n_cols, ids, sparse),
        (true, false) => FeatureMatrix::dense(n_cols, ids, dense),
        (false, false) => Err(Error::Invalid(format!(
            "{}: mixes sparse and dense rows",
            path.display()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_pairs_merges_and_sorts() {
        let r = SparseRow::from_pairs(vec![(3, 1.0), (1, 2.0), (3, 0.5), (2, 0.0)]);
        assert_eq!(r.indices, vec![1, 3]);
        assert_eq!(r.values, vec![2.0, 1.5]);
    }

    #[test]
    fn invariants_checked() {
        let bad = SparseRow {
            indices: vec![5],
            values: vec![1.0],
        };
        assert!(FeatureMatrix::sparse(3, vec!["a".into()], vec![bad]).is_err());
        assert!(FeatureMatrix::dense(2, vec!["a".into(), "a".into()], vec![vec![0.0; 2]; 2]).is_err());
        assert!(FeatureMatrix::dense(2, vec!["a".into()], vec![vec![f64::NAN, 0.0]]).is_err());
    }

    #[test]
    fn row_access() {
        let m = FeatureMatrix::sparse(
            4,
            vec!["x".into()],
            vec![SparseRow {
                indices: vec![1, 3],
                values: vec![2.0, -1.0],
            }],
        )
        .unwrap();
        let r = m.row(0);
        assert_eq!(r.get(1), 2.0);
        assert_eq!(r.get(2), 0.0);
        assert_eq!(r.dot(&[1.0, 1.0, 1.0, 1.0]), 1.0);
        assert_eq!(r.to_dense(4), vec![0.0, 2.0, 0.0, -1.0]);
    }

    #[test]
    fn jsonl_dump_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let m = FeatureMatrix::sparse(
            5,
            vec!["a".into(), "b".into()],
            vec![
                SparseRow {
                    indices: vec![0, 4],
                    values: vec![0.1, 0.7],
                },
                SparseRow::default(),
            ],
        )
        .unwrap();
        let p = dir.path().join("m.jsonl");
        write_matrix_jsonl(&m, &p).unwrap();
        assert_eq!(read_matrix_jsonl(&p).unwrap(), m);

        let d = FeatureMatrix::from_dense_rows(vec![vec![1.5, 2.0], vec![0.0, -3.25]]).unwrap();
        write_matrix_jsonl(&d, &p).unwrap();
        assert_eq!(read_matrix_jsonl(&p).unwrap(), d);
    }
}
