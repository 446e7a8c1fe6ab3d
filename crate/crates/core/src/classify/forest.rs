//! Random forest: CART trees on stratified bootstrap resamples with
//! `floor(sqrt(d))` candidate features per split, combined by majority vote.
//!
//! Each class is resampled with replacement to its own size, so every tree
//! sees every class even when the support set holds one row per class. A
//! node keeps drawing features past the `sqrt(d)` budget until it has found
//! at least one valid split (or run out of features).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{argmax, TrainSet};
use super::tree::{class_distribution, grow, Gini, GrowParams, RandomFeatures, Tree};
use super::RfcParams;
use crate::featurize::RowView;
use crate::rng::{derive_seed, Xoshiro256StarStar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
    n_classes: usize,
}

impl RandomForest {
    /// Vote fraction per class.
    pub fn votes(&self, row: RowView<'_>) -> Vec<f64> {
        let mut v = vec![0.0; self.n_classes];
        for t in &self.trees {
            v[argmax(t.leaf(row))] += 1.0;
        }
        let n = self.trees.len() as f64;
        v.iter_mut().for_each(|c| *c /= n);
        v
    }
}

pub(crate) fn max_features(feature_dim: usize) -> usize {
    ((feature_dim as f64).sqrt().floor() as usize).max(1)
}

fn bootstrap(by_class: &[Vec<usize>], rng: &mut Xoshiro256StarStar) -> Vec<usize> {
    let mut out = Vec::new();
    for members in by_class {
        for _ in 0..members.len() {
            out.push(members[rng.index(members.len())]);
        }
    }
    out
}

/// Trees are grown in parallel; each uses its own seed derived from
/// `(seed, tree index)`, so the result does not depend on scheduling.
pub(crate) fn train(data: &TrainSet, p: &RfcParams, seed: u64) -> RandomForest {
    let by_class = data.by_class();
    let crit = Gini {
        y: &data.y,
        n_classes: data.n_classes,
    };
    let grow_params = GrowParams {
        max_depth: p.max_depth,
        min_samples_split: p.min_samples_split,
    };
    let m = p.max_features.unwrap_or_else(|| max_features(data.feature_dim));
    let trees = (0..p.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut boot_rng = Xoshiro256StarStar::seed_from_u64(derive_seed(&[seed, t as u64, 0]));
            let samples = bootstrap(&by_class, &mut boot_rng);
            let feat_rng = Xoshiro256StarStar::seed_from_u64(derive_seed(&[seed, t as u64, 1]));
            let mut sampler = RandomFeatures::new(feat_rng, &data.active, data.feature_dim, m);
            grow(
                data,
                samples,
                &crit,
                &grow_params,
                &mut sampler,
                &mut |s| class_distribution(&data.y, data.n_classes, s),
            )
        })
        .collect();
    RandomForest {
        trees,
        n_classes: data.n_classes,
    }
}
