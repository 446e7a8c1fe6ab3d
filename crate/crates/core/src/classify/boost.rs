//! Gradient boosting on multinomial log-loss.
//!
//! Scores start at the log class priors. Each stage fits one regression
//! tree per class to the residuals `y_ik - p_ik` (squared-error CART), sets
//! each leaf to the one-step Newton value
//! `(K - 1) / K * sum(r) / sum(|r| (1 - |r|))` (0 when the denominator is 0),
//! and adds it scaled by the learning rate. A stage tree without any split
//! contributes nothing, so degenerate stages leave the prior-only scores.

use serde::{Deserialize, Serialize};

use super::data::{log_sum_exp, softmax, TrainSet};
use super::tree::{grow, AllFeatures, GrowParams, SquaredError, Tree, TreeNode};
use super::{Diagnostics, GbcParams};
use crate::featurize::RowView;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    init: Vec<f64>,
    learning_rate: f64,
    /// `stages[m][k]` is the stage-`m` tree for class `k`.
    pub stages: Vec<Vec<Tree>>,
}

impl GradientBoosting {
    pub fn scores(&self, row: RowView<'_>) -> Vec<f64> {
        let mut f = self.init.clone();
        for stage in &self.stages {
            for (fk, t) in f.iter_mut().zip(stage) {
                *fk += self.learning_rate * t.leaf(row)[0];
            }
        }
        f
    }

    pub fn proba(&self, row: RowView<'_>) -> Vec<f64> {
        softmax(&self.scores(row))
    }
}

fn mean_log_loss(f: &[Vec<f64>], y: &[usize]) -> f64 {
    f.iter().zip(y).map(|(fi, &yi)| log_sum_exp(fi) - fi[yi]).sum::<f64>() / y.len() as f64
}

pub(crate) fn train(data: &TrainSet, p: &GbcParams, diag: &mut Diagnostics) -> GradientBoosting {
    let n = data.n();
    let k = data.n_classes;
    let init: Vec<f64> = data
        .by_class()
        .iter()
        .map(|m| (m.len() as f64 / n as f64).ln())
        .collect();
    let mut f: Vec<Vec<f64>> = vec![init.clone(); n];
    let grow_params = GrowParams {
        max_depth: p.max_depth,
        min_samples_split: p.min_samples_split,
    };
    let scale = (k as f64 - 1.0) / k as f64;
    let mut stages = Vec::with_capacity(p.n_stages);
    let mut constant_trees = 0usize;
    diag.loss_curve.push(mean_log_loss(&f, &data.y));
    for _ in 0..p.n_stages {
        let probs: Vec<Vec<f64>> = f.iter().map(|fi| softmax(fi)).collect();
        let mut stage = Vec::with_capacity(k);
        for c in 0..k {
            let resid: Vec<f64> = probs
                .iter()
                .zip(&data.y)
                .map(|(pi, &yi)| if yi == c { 1.0 } else { 0.0 } - pi[c])
                .collect();
            let crit = SquaredError { target: &resid };
            let mut leaf = |s: &[usize]| {
                let num: f64 = s.iter().map(|&i| resid[i]).sum();
                let den: f64 = s.iter().map(|&i| resid[i].abs() * (1.0 - resid[i].abs())).sum();
                vec![if den == 0.0 { 0.0 } else { scale * num / den }]
            };
            let mut tree = grow(
                data,
                (0..n).collect(),
                &crit,
                &grow_params,
                &mut AllFeatures::new(data.width()),
                &mut leaf,
            );
            if tree.nodes.len() == 1 {
                constant_trees += 1;
                tree.nodes[0] = TreeNode::Leaf { value: vec![0.0] };
            }
            stage.push(tree);
        }
        for (xi, fi) in data.x.iter().zip(f.iter_mut()) {
            for (fk, t) in fi.iter_mut().zip(&stage) {
                *fk += p.learning_rate * t.leaf_compact(&data.active, xi)[0];
            }
        }
        stages.push(stage);
        diag.loss_curve.push(mean_log_loss(&f, &data.y));
    }
    diag.iterations = p.n_stages;
    diag.converged = true;
    if constant_trees > 0 {
        diag.warnings.push(format!(
            "gbc: {constant_trees} stage trees had no split and were held at zero"
        ));
    }
    GradientBoosting {
        init,
        learning_rate: p.learning_rate,
        stages,
    }
}
