//! One-hidden-layer perceptron: ReLU hidden units, softmax output,
//! mean cross-entropy, full-batch Adam.
//!
//! Initial weights are uniform in `±1/sqrt(fan_in)`. Input-layer weights
//! for column `j` come from their own stream seeded by `(seed, 0, j)`;
//! `b1`, `W2`, `b2` come, in that order, from the stream seeded by
//! `(seed, 1)`. Columns that are zero in every training row never receive a
//! gradient, so only the active columns are stored and the rest are
//! regenerated from the seed when a query row touches them.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::data::{softmax, TrainSet};
use super::{Diagnostics, MlpParams};
use crate::featurize::{FeatureMatrix, RowView};
use crate::rng::{derive_seed, Xoshiro256StarStar};

/// Mean cross-entropy and its gradient.
///
/// `params` holds `W1` (`hidden x width`, row-major), `b1` (`hidden`),
/// `W2` (`n_classes x hidden`, row-major), then `b2` (`n_classes`).
pub fn mlp_objective(
    params: &[f64],
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    hidden: usize,
) -> (f64, Vec<f64>) {
    let width = x.first().map_or(0, Vec::len);
    let l = Layout::new(width, hidden, n_classes);
    assert_eq!(params.len(), l.len(), "parameter length");
    let (w1, b1, w2, b2) = l.split(params);
    let mut grad = vec![0.0; params.len()];
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut z = vec![0.0; hidden];
    let mut a = vec![0.0; hidden];
    let mut scores = vec![0.0; n_classes];
    let mut da = vec![0.0; hidden];
    for (xi, &yi) in x.iter().zip(y) {
        for h in 0..hidden {
            z[h] = b1[h] + dot(&w1[h * width..(h + 1) * width], xi);
            a[h] = z[h].max(0.0);
        }
        for k in 0..n_classes {
            scores[k] = b2[k] + dot(&w2[k * hidden..(k + 1) * hidden], &a);
        }
        let p = softmax(&scores);
        loss -= p[yi].max(f64::MIN_POSITIVE).ln();
        da.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..n_classes {
            let r = p[k] - if k == yi { 1.0 } else { 0.0 };
            let w2k = &w2[k * hidden..(k + 1) * hidden];
            for h in 0..hidden {
                grad[l.w2 + k * hidden + h] += r * a[h];
                da[h] += r * w2k[h];
            }
            grad[l.b2 + k] += r;
        }
        for h in 0..hidden {
            if z[h] <= 0.0 {
                continue;
            }
            let g = da[h];
            for (gj, xj) in grad[h * width..(h + 1) * width].iter_mut().zip(xi) {
                *gj += g * xj;
            }
            grad[l.b1 + h] += g;
        }
    }
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Offsets of each block in the flat parameter vector.
struct Layout {
    b1: usize,
    w2: usize,
    b2: usize,
    end: usize,
}

impl Layout {
    fn new(width: usize, hidden: usize, k: usize) -> Self {
        let b1 = width * hidden;
        let w2 = b1 + hidden;
        let b2 = w2 + k * hidden;
        Layout {
            b1,
            w2,
            b2,
            end: b2 + k,
        }
    }
    fn len(&self) -> usize {
        self.end
    }
    fn split<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
        (
            &p[..self.b1],
            &p[self.b1..self.w2],
            &p[self.w2..self.b2],
            &p[self.b2..],
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    seed: u64,
    feature_dim: usize,
    hidden: usize,
    active: Vec<u32>,
    /// `active.len() x hidden`: trained input weights, one row per active column.
    w1_active: Vec<Vec<f64>>,
    b1: Vec<f64>,
    /// `n_classes x hidden`.
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
}

/// Initial input weights of column `j`.
fn init_column(seed: u64, j: u32, hidden: usize, bound: f64) -> Vec<f64> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(&[seed, 0, j as u64]));
    (0..hidden).map(|_| rng.uniform(-bound, bound)).collect()
}

impl MlpModel {
    fn bound(&self) -> f64 {
        1.0 / (self.feature_dim.max(1) as f64).sqrt()
    }

    fn column<'a>(&'a self, j: u32, cache: &'a HashMap<u32, Vec<f64>>) -> std::borrow::Cow<'a, [f64]> {
        match self.active.binary_search(&j) {
            Ok(c) => (&self.w1_active[c][..]).into(),
            Err(_) => match cache.get(&j) {
                Some(v) => (&v[..]).into(),
                None => init_column(self.seed, j, self.hidden, self.bound()).into(),
            },
        }
    }

    fn scores_cached(&self, row: RowView<'_>, cache: &HashMap<u32, Vec<f64>>) -> Vec<f64> {
        let mut z = self.b1.clone();
        row.for_each(|j, v| {
            if v != 0.0 {
                let col = self.column(j as u32, cache);
                for (zh, w) in z.iter_mut().zip(col.iter()) {
                    *zh += w * v;
                }
            }
        });
        z.iter_mut().for_each(|v| *v = v.max(0.0));
        self.w2
            .iter()
            .zip(&self.b2)
            .map(|(w, b)| b + dot(w, &z))
            .collect()
    }

    pub fn scores(&self, row: RowView<'_>) -> Vec<f64> {
        self.scores_cached(row, &HashMap::new())
    }

    pub fn proba(&self, row: RowView<'_>) -> Vec<f64> {
        softmax(&self.scores(row))
    }

    /// Output scores for every row, regenerating each untrained input
    /// column once.
    pub fn scores_matrix(&self, x: &FeatureMatrix) -> Vec<Vec<f64>> {
        let mut cache = HashMap::new();
        let bound = self.bound();
        for row in x.rows() {
            row.for_each(|j, v| {
                let j = j as u32;
                if v != 0.0 && self.active.binary_search(&j).is_err() {
                    cache
                        .entry(j)
                        .or_insert_with(|| init_column(self.seed, j, self.hidden, bound));
                }
            });
        }
        x.rows().map(|r| self.scores_cached(r, &cache)).collect()
    }
}

pub(crate) fn train(data: &TrainSet, p: &MlpParams, seed: u64, diag: &mut Diagnostics) -> MlpModel {
    let width = data.width();
    let h = p.hidden;
    let k = data.n_classes;
    let l = Layout::new(width, h, k);
    let bound1 = 1.0 / (data.feature_dim.max(1) as f64).sqrt();
    let bound2 = 1.0 / (h as f64).sqrt();
    let mut params = vec![0.0; l.len()];
    for (c, &j) in data.active.iter().enumerate() {
        for (hh, w) in init_column(seed, j, h, bound1).into_iter().enumerate() {
            params[hh * width + c] = w;
        }
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(&[seed, 1]));
    for v in &mut params[l.b1..l.w2] {
        *v = rng.uniform(-bound1, bound1);
    }
    for v in &mut params[l.w2..] {
        *v = rng.uniform(-bound2, bound2);
    }

    let (b1m, b2m) = (p.beta1, p.beta2);
    let mut m = vec![0.0; params.len()];
    let mut v = vec![0.0; params.len()];
    for t in 1..=p.epochs {
        let (loss, grad) = mlp_objective(&params, &data.x, &data.y, k, h);
        diag.loss_curve.push(loss);
        let c1 = 1.0 - b1m.powi(t as i32);
        let c2 = 1.0 - b2m.powi(t as i32);
        for i in 0..params.len() {
            m[i] = b1m * m[i] + (1.0 - b1m) * grad[i];
            v[i] = b2m * v[i] + (1.0 - b2m) * grad[i] * grad[i];
            params[i] -= p.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + p.epsilon);
        }
    }
    diag.loss_curve
        .push(mlp_objective(&params, &data.x, &data.y, k, h).0);
    diag.iterations = p.epochs;
    diag.converged = true;

    let (w1, b1, w2, b2) = l.split(&params);
    MlpModel {
        seed,
        feature_dim: data.feature_dim,
        hidden: h,
        active: data.active.clone(),
        w1_active: (0..width)
            .map(|c| (0..h).map(|hh| w1[hh * width + c]).collect())
            .collect(),
        b1: b1.to_vec(),
        w2: w2.chunks(h.max(1)).map(<[f64]>::to_vec).collect(),
        b2: b2.to_vec(),
    }
}
