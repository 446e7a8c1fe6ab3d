//! One-vs-rest linear SVM, hinge loss with L2 penalty, full-batch
//! subgradient descent.
//!
//! Each binary problem minimizes
//! `lambda/2 * ||w||^2 + mean(max(0, 1 - s_i * (w.x_i + b)))` with
//! `lambda = 1 / (C * n)` and an unpenalized bias `b`. Step size is
//! `1 / (lambda * t)`; after each step `w` is projected onto the ball of
//! radius `1 / sqrt(lambda)`, and the iterate with the lowest objective is
//! kept. The default `C` is large, so on separable support sets the
//! solution is the hard-margin separator.

use serde::{Deserialize, Serialize};

use super::data::{project, TrainSet};
use super::{Diagnostics, SvmParams};
use crate::featurize::RowView;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    active: Vec<u32>,
    /// One `active.len() + 1` vector per class; the last entry is the bias.
    weights: Vec<Vec<f64>>,
}

impl SvmModel {
    /// Per-class margins.
    pub fn margins(&self, row: RowView<'_>) -> Vec<f64> {
        let x = project(&self.active, row);
        self.weights
            .iter()
            .map(|w| {
                let (wx, b) = w.split_at(x.len());
                b[0] + wx.iter().zip(&x).map(|(a, c)| a * c).sum::<f64>()
            })
            .collect()
    }
}

fn objective(w: &[f64], x: &[Vec<f64>], s: &[f64], lambda: f64) -> f64 {
    let n = x.len() as f64;
    let hinge: f64 = x
        .iter()
        .zip(s)
        .map(|(xi, si)| (1.0 - si * dot_aug(w, xi)).max(0.0))
        .sum();
    0.5 * lambda * w[..w.len() - 1].iter().map(|v| v * v).sum::<f64>() + hinge / n
}

fn dot_aug(w: &[f64], x: &[f64]) -> f64 {
    w[x.len()] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}

fn train_binary(x: &[Vec<f64>], s: &[f64], lambda: f64, steps: usize) -> (Vec<f64>, f64) {
    let width = x.first().map_or(0, Vec::len);
    let n = x.len() as f64;
    let radius = 1.0 / lambda.sqrt();
    let mut w = vec![0.0; width + 1];
    let mut best = w.clone();
    let mut best_obj = objective(&w, x, s, lambda);
    let mut g = vec![0.0; width + 1];
    for t in 1..=steps {
        let eta = 1.0 / (lambda * t as f64);
        for (gi, wi) in g.iter_mut().zip(&w) {
            *gi = lambda * wi;
        }
        g[width] = 0.0;
        for (xi, &si) in x.iter().zip(s) {
            if si * dot_aug(&w, xi) < 1.0 {
                for (gj, xj) in g.iter_mut().zip(xi) {
                    *gj -= si * xj / n;
                }
                g[width] -= si / n;
            }
        }
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= eta * gi;
        }
        let norm = w[..width].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > radius {
            let scale = radius / norm;
            w[..width].iter_mut().for_each(|v| *v *= scale);
        }
        let obj = objective(&w, x, s, lambda);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&w);
        }
    }
    (best, best_obj)
}

pub(crate) fn train(data: &TrainSet, p: &SvmParams, diag: &mut Diagnostics) -> SvmModel {
    let lambda = 1.0 / (p.c * data.n() as f64);
    let weights = (0..data.n_classes)
        .map(|k| {
            let s: Vec<f64> = data
                .y
                .iter()
                .map(|&c| if c == k { 1.0 } else { -1.0 })
                .collect();
            let (w, obj) = train_binary(&data.x, &s, lambda, p.steps);
            diag.loss_curve.push(obj);
            w
        })
        .collect();
    diag.iterations = p.steps;
    diag.converged = true;
    SvmModel {
        active: data.active.clone(),
        weights,
    }
}
