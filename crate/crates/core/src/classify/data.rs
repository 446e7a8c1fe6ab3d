//! Training-set preparation shared by all classifiers.
//!
//! Support sets are tiny (a handful of rows) while feature spaces can be
//! very wide, so trainers work on a compact dense copy holding only the
//! *active* columns: those with a nonzero value in some training row. A
//! column that is zero in every training row receives no gradient, never
//! yields a split, and contributes identically to every class under the
//! Gaussian model, so dropping it during training changes nothing.

use crate::error::{Error, Result};
use crate::featurize::{FeatureMatrix, RowView};

pub(crate) struct TrainSet {
    /// Active original column indices, ascending.
    pub active: Vec<u32>,
    /// `n x active.len()` compact rows.
    pub x: Vec<Vec<f64>>,
    /// Class index per row.
    pub y: Vec<usize>,
    pub n_classes: usize,
    pub feature_dim: usize,
}

impl TrainSet {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn width(&self) -> usize {
        self.active.len()
    }

    /// Row indices of each class.
    pub fn by_class(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes];
        for (i, &c) in self.y.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// Sorted distinct labels of `y`.
pub(crate) fn canonical_labels<S: AsRef<str>>(y: &[S]) -> Vec<String> {
    let mut labels: Vec<String> = y.iter().map(|s| s.as_ref().to_owned()).collect();
    labels.sort();
    labels.dedup();
    labels
}

/// Validate inputs and build the compact training view. `labels` must be
/// sorted and unique; every label needs at least one row.
pub(crate) fn prepare<S: AsRef<str>>(x: &FeatureMatrix, y: &[S], labels: &[String]) -> Result<TrainSet> {
    if y.len() != x.n_rows() {
        return Err(Error::TrainingData(format!(
            "{} labels for {} feature rows",
            y.len(),
            x.n_rows()
        )));
    }
    if labels.len() < 2 {
        return Err(Error::TrainingData(format!(
            "need at least 2 classes, got {}",
            labels.len()
        )));
    }
    let yi = y
        .iter()
        .map(|l| {
            labels
                .binary_search_by(|p| p.as_str().cmp(l.as_ref()))
                .map_err(|_| Error::UnknownLabel(l.as_ref().to_owned()))
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut present = vec![false; labels.len()];
    yi.iter().for_each(|&c| present[c] = true);
    if let Some(missing) = present.iter().position(|p| !p) {
        return Err(Error::TrainingData(format!(
            "class {:?} has no training example",
            labels[missing]
        )));
    }
    let d = x.n_cols();
    let mut is_active = vec![false; d];
    for row in x.rows() {
        let mut bad = false;
        row.for_each(|j, v| {
            if !v.is_finite() {
                bad = true;
            }
            if v != 0.0 {
                is_active[j] = true;
            }
        });
        if bad {
            return Err(Error::TrainingData("non-finite feature value".into()));
        }
    }
    let active: Vec<u32> = (0..d as u32).filter(|&j| is_active[j as usize]).collect();
    let xs = x.rows().map(|r| project(&active, r)).collect();
    Ok(TrainSet {
        active,
        x: xs,
        y: yi,
        n_classes: labels.len(),
        feature_dim: d,
    })
}

/// Gather the active columns of `row`.
pub(crate) fn project(active: &[u32], row: RowView<'_>) -> Vec<f64> {
    match row {
        RowView::Dense(d) => active.iter().map(|&j| d[j as usize]).collect(),
        RowView::Sparse { indices, values } => {
            let mut out = vec![0.0; active.len()];
            for (j, v) in indices.iter().zip(values) {
                if let Ok(k) = active.binary_search(j) {
                    out[k] = *v;
                }
            }
            out
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax.
pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// `ln(sum(exp(scores)))`.
pub(crate) fn log_sum_exp(scores: &[f64]) -> f64 {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::SparseRow;

    #[test]
    fn compacts_active_columns() {
        let x = FeatureMatrix::sparse(
            10,
            vec!["a".into(), "b".into()],
            vec![
                SparseRow {
                    indices: vec![2, 7],
                    values: vec![1.0, 2.0],
                },
                SparseRow {
                    indices: vec![7, 9],
                    values: vec![3.0, 4.0],
                },
            ],
        )
        .unwrap();
        let labels = vec!["p".to_string(), "q".to_string()];
        let t = prepare(&x, &["q", "p"], &labels).unwrap();
        assert_eq!(t.active, vec![2, 7, 9]);
        assert_eq!(t.x, vec![vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 4.0]]);
        assert_eq!(t.y, vec![1, 0]);
    }

    #[test]
    fn rejects_bad_labels() {
        let x = FeatureMatrix::from_dense_rows(vec![vec![1.0], vec![2.0]]).unwrap();
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(matches!(prepare(&x, &["a", "c"], &labels), Err(Error::UnknownLabel(_))));
        assert!(matches!(prepare(&x, &["a", "a"], &labels), Err(Error::TrainingData(_))));
        assert!(prepare(&x, &["a"], &labels).is_err());
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1000.0, 999.0, -5.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }
}
