//! Multinomial logistic regression trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use super::data::{project, softmax, TrainSet};
use super::{Diagnostics, LrcParams};
use crate::featurize::RowView;

/// Mean cross-entropy plus `l2 / 2 * ||W||^2` (bias unpenalized) and its
/// gradient.
///
/// `params` is `W` row-major (`n_classes x width`) followed by the
/// `n_classes` biases; the gradient uses the same layout.
pub fn softmax_regression_objective(
    params: &[f64],
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    let width = x.first().map_or(0, Vec::len);
    assert_eq!(params.len(), n_classes * (width + 1), "parameter length");
    let (w, b) = params.split_at(n_classes * width);
    let n = x.len() as f64;
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let mut scores = vec![0.0; n_classes];
    for (xi, &yi) in x.iter().zip(y) {
        for k in 0..n_classes {
            let wk = &w[k * width..(k + 1) * width];
            scores[k] = b[k] + wk.iter().zip(xi).map(|(a, c)| a * c).sum::<f64>();
        }
        let p = softmax(&scores);
        loss -= p[yi].max(f64::MIN_POSITIVE).ln();
        for k in 0..n_classes {
            let r = p[k] - if k == yi { 1.0 } else { 0.0 };
            let gk = &mut grad[k * width..(k + 1) * width];
            for (g, v) in gk.iter_mut().zip(xi) {
                *g += r * v;
            }
            grad[n_classes * width + k] += r;
        }
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    let mut penalty = 0.0;
    for (g, wv) in grad[..n_classes * width].iter_mut().zip(w) {
        *g += l2 * wv;
        penalty += wv * wv;
    }
    (loss + 0.5 * l2 * penalty, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    active: Vec<u32>,
    /// `n_classes x active.len()`, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl LogisticModel {
    pub fn scores(&self, row: RowView<'_>) -> Vec<f64> {
        let x = project(&self.active, row);
        let width = self.active.len();
        self.bias
            .iter()
            .enumerate()
            .map(|(k, b)| {
                b + self.weights[k * width..(k + 1) * width]
                    .iter()
                    .zip(&x)
                    .map(|(w, v)| w * v)
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn proba(&self, row: RowView<'_>) -> Vec<f64> {
        softmax(&self.scores(row))
    }
}

/// Loss after each iteration is recorded in `diag.loss_curve`.
pub(crate) fn train(data: &TrainSet, p: &LrcParams, diag: &mut Diagnostics) -> LogisticModel {
    let k = data.n_classes;
    let width = data.width();
    let mut params = vec![0.0; k * (width + 1)];
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..p.max_iter {
        let (loss, grad) = softmax_regression_objective(&params, &data.x, &data.y, k, p.l2);
        diag.loss_curve.push(loss);
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < p.tol {
            converged = true;
            iterations = it;
            break;
        }
        for (w, g) in params.iter_mut().zip(&grad) {
            *w -= p.step * g;
        }
        iterations = it + 1;
    }
    diag.iterations = iterations;
    diag.converged = converged;
    if !converged {
        diag.warnings.push(format!(
            "lrc: gradient norm above {} after {} iterations",
            p.tol, p.max_iter
        ));
    }
    let bias = params.split_off(k * width);
    LogisticModel {
        active: data.active.clone(),
        weights: params,
        bias,
    }
}
