//! Gaussian naive Bayes.
//!
//! Per-class feature means and (population) variances, each variance
//! increased by `eps = var_smoothing * max_j var(x_j)` where the maximum runs
//! over the per-feature variance of all training rows (1.0 when that is
//! zero). With one row per class every class variance is zero before
//! smoothing, so the model reduces to nearest-class-mean under a shared
//! isotropic variance.

use serde::{Deserialize, Serialize};

use super::data::{project, softmax, TrainSet};
use super::NbcParams;
use crate::featurize::RowView;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    active: Vec<u32>,
    /// `n_classes x active.len()`.
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    log_priors: Vec<f64>,
    epsilon: f64,
}

fn mean_var(rows: &[&[f64]], width: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; width];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; width];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    (mean, var)
}

impl GaussianNb {
    /// Joint log-likelihood `ln P(c) + ln p(x | c)` per class, omitting
    /// terms that are identical for every class (inactive columns).
    pub fn joint_log_likelihood(&self, row: RowView<'_>) -> Vec<f64> {
        let x = project(&self.active, row);
        self.means
            .iter()
            .zip(&self.variances)
            .zip(&self.log_priors)
            .map(|((mu, var), lp)| {
                let mut s = 0.0;
                for ((xj, m), v) in x.iter().zip(mu).zip(var) {
                    s += (2.0 * std::f64::consts::PI * v).ln() + (xj - m) * (xj - m) / v;
                }
                lp - 0.5 * s
            })
            .collect()
    }

    pub fn proba(&self, row: RowView<'_>) -> Vec<f64> {
        softmax(&self.joint_log_likelihood(row))
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

pub(crate) fn train(data: &TrainSet, p: &NbcParams) -> GaussianNb {
    let width = data.width();
    let all: Vec<&[f64]> = data.x.iter().map(Vec::as_slice).collect();
    let (_, all_var) = mean_var(&all, width);
    let max_var = all_var.iter().copied().fold(0.0, f64::max);
    let epsilon = p.var_smoothing * if max_var > 0.0 { max_var } else { 1.0 };
    let n = data.n() as f64;
    let mut means = Vec::with_capacity(data.n_classes);
    let mut variances = Vec::with_capacity(data.n_classes);
    let mut log_priors = Vec::with_capacity(data.n_classes);
    for members in data.by_class() {
        let rows: Vec<&[f64]> = members.iter().map(|&i| data.x[i].as_slice()).collect();
        let (m, mut v) = mean_var(&rows, width);
        v.iter_mut().for_each(|s| *s += epsilon);
        means.push(m);
        variances.push(v);
        log_priors.push((members.len() as f64 / n).ln());
    }
    GaussianNb {
        active: data.active.clone(),
        means,
        variances,
        log_priors,
        epsilon,
    }
}
