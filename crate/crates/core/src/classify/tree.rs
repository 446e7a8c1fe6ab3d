//! CART trees shared by the decision tree, random forest, and boosting.
//!
//! Splits are `x[feature] <= threshold` with thresholds at midpoints between
//! consecutive distinct values. The best split maximizes the impurity
//! decrease; ties go to the lowest feature index, then the lowest
//! threshold. Trees are stored as a flat preorder node list.

use serde::{Deserialize, Serialize};

use super::data::TrainSet;
use crate::featurize::RowView;
use crate::rng::Xoshiro256StarStar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        /// Original (uncompacted) column index.
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Leaf value reached by a row whose column `j` is `get(j)`.
    pub fn leaf_by(&self, get: impl Fn(usize) -> f64) -> &[f64] {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if get(*feature as usize) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn leaf(&self, row: RowView<'_>) -> &[f64] {
        self.leaf_by(|j| row.get(j))
    }

    /// Leaf for compact training row `x` (columns listed in `active`).
    pub(crate) fn leaf_compact(&self, active: &[u32], x: &[f64]) -> &[f64] {
        self.leaf_by(|j| {
            active
                .binary_search(&(j as u32))
                .map_or(0.0, |c| x[c])
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + go(nodes, *left as usize).max(go(nodes, *right as usize))
                }
            }
        }
        go(&self.nodes, 0)
    }
}

/// Impurity bookkeeping for one node side.
pub(crate) trait Criterion {
    type Stats: Clone;
    fn empty(&self) -> Self::Stats;
    fn add(&self, s: &mut Self::Stats, sample: usize);
    fn remove(&self, s: &mut Self::Stats, sample: usize);
    /// Sample count times impurity.
    fn cost(&self, s: &Self::Stats) -> f64;
    fn is_pure(&self, s: &Self::Stats) -> bool;
}

/// Gini impurity over class labels.
pub(crate) struct Gini<'a> {
    pub y: &'a [usize],
    pub n_classes: usize,
}

impl Criterion for Gini<'_> {
    type Stats = (Vec<f64>, f64);

    fn empty(&self) -> Self::Stats {
        (vec![0.0; self.n_classes], 0.0)
    }
    fn add(&self, s: &mut Self::Stats, i: usize) {
        s.0[self.y[i]] += 1.0;
        s.1 += 1.0;
    }
    fn remove(&self, s: &mut Self::Stats, i: usize) {
        s.0[self.y[i]] -= 1.0;
        s.1 -= 1.0;
    }
    fn cost(&self, s: &Self::Stats) -> f64 {
        if s.1 == 0.0 {
            return 0.0;
        }
        s.1 - s.0.iter().map(|c| c * c).sum::<f64>() / s.1
    }
    fn is_pure(&self, s: &Self::Stats) -> bool {
        s.0.iter().filter(|&&c| c > 0.0).count() <= 1
    }
}

/// Squared error around the mean.
pub(crate) struct SquaredError<'a> {
    pub target: &'a [f64],
}

impl Criterion for SquaredError<'_> {
    /// (count, sum, sum of squares)
    type Stats = (f64, f64, f64);

    fn empty(&self) -> Self::Stats {
        (0.0, 0.0, 0.0)
    }
    fn add(&self, s: &mut Self::Stats, i: usize) {
        let t = self.target[i];
        s.0 += 1.0;
        s.1 += t;
        s.2 += t * t;
    }
    fn remove(&self, s: &mut Self::Stats, i: usize) {
        let t = self.target[i];
        s.0 -= 1.0;
        s.1 -= t;
        s.2 -= t * t;
    }
    fn cost(&self, s: &Self::Stats) -> f64 {
        if s.0 == 0.0 {
            return 0.0;
        }
        (s.2 - s.1 * s.1 / s.0).max(0.0)
    }
    fn is_pure(&self, s: &Self::Stats) -> bool {
        self.cost(s) <= 1e-14 * s.2.max(1.0)
    }
}

/// Outcome of drawing one candidate feature.
pub(crate) enum Draw {
    /// Compact column index.
    Active(usize),
    /// A column that is zero for every training row.
    Inactive,
}

/// Supplies candidate features at each node.
pub(crate) trait FeatureSampler {
    fn start_node(&mut self);
    fn next(&mut self) -> Option<Draw>;
    /// Stop after this many draws once a valid split has been seen.
    fn max_features(&self) -> usize;
}

/// Every active column in ascending order.
pub(crate) struct AllFeatures {
    width: usize,
    at: usize,
}

impl AllFeatures {
    pub fn new(width: usize) -> Self {
        AllFeatures { width, at: 0 }
    }
}

impl FeatureSampler for AllFeatures {
    fn start_node(&mut self) {
        self.at = 0;
    }
    fn next(&mut self) -> Option<Draw> {
        (self.at < self.width).then(|| {
            self.at += 1;
            Draw::Active(self.at - 1)
        })
    }
    fn max_features(&self) -> usize {
        usize::MAX
    }
}

/// Uniform random feature order over all `feature_dim` columns, drawn
/// lazily (sparse Fisher-Yates) so wide feature spaces cost only what is
/// visited.
pub(crate) struct RandomFeatures<'a> {
    rng: Xoshiro256StarStar,
    active: &'a [u32],
    feature_dim: usize,
    max_features: usize,
    swaps: std::collections::HashMap<usize, usize>,
    drawn: usize,
}

impl<'a> RandomFeatures<'a> {
    pub fn new(rng: Xoshiro256StarStar, active: &'a [u32], feature_dim: usize, max_features: usize) -> Self {
        RandomFeatures {
            rng,
            active,
            feature_dim,
            max_features,
            swaps: Default::default(),
            drawn: 0,
        }
    }
}

impl FeatureSampler for RandomFeatures<'_> {
    fn start_node(&mut self) {
        self.swaps.clear();
        self.drawn = 0;
    }
    fn next(&mut self) -> Option<Draw> {
        if self.drawn >= self.feature_dim {
            return None;
        }
        let i = self.drawn;
        let j = i + self.rng.index(self.feature_dim - i);
        let at_j = *self.swaps.get(&j).unwrap_or(&j);
        let at_i = *self.swaps.get(&i).unwrap_or(&i);
        self.swaps.insert(j, at_i);
        self.drawn += 1;
        Some(
            match self.active.binary_search(&(at_j as u32)) {
                Ok(c) => Draw::Active(c),
                Err(_) => Draw::Inactive,
            },
        )
    }
    fn max_features(&self) -> usize {
        self.max_features
    }
}

pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

struct Split {
    column: usize,
    threshold: f64,
    gain: f64,
}

/// Better split: larger gain, then lower column, then lower threshold.
fn better(candidate: &Split, incumbent: &Option<Split>) -> bool {
    match incumbent {
        None => true,
        Some(b) => {
            candidate.gain > b.gain
                || (candidate.gain == b.gain
                    && (candidate.column, candidate.threshold) < (b.column, b.threshold))
        }
    }
}

fn best_split_on<C: Criterion>(
    data: &TrainSet,
    samples: &[usize],
    column: usize,
    crit: &C,
    parent: &C::Stats,
    parent_cost: f64,
    scratch: &mut Vec<(f64, usize)>,
) -> Option<Split> {
    scratch.clear();
    scratch.extend(samples.iter().map(|&i| (data.x[i][column], i)));
    scratch.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if scratch.first()?.0 == scratch.last()?.0 {
        return None;
    }
    let mut left = crit.empty();
    let mut right = parent.clone();
    let mut best: Option<Split> = None;
    for p in 1..scratch.len() {
        let (v_prev, i_prev) = scratch[p - 1];
        crit.add(&mut left, i_prev);
        crit.remove(&mut right, i_prev);
        let v = scratch[p].0;
        if v_prev == v {
            continue;
        }
        let mut threshold = v_prev + (v - v_prev) / 2.0;
        if threshold >= v {
            threshold = v_prev;
        }
        let gain = parent_cost - crit.cost(&left) - crit.cost(&right);
        let cand = Split {
            column,
            threshold,
            gain,
        };
        if better(&cand, &best) {
            best = Some(cand);
        }
    }
    best
}

/// Grow a tree on `samples` (indices into `data.x`, repeats allowed).
pub(crate) fn grow<C: Criterion>(
    data: &TrainSet,
    samples: Vec<usize>,
    crit: &C,
    params: &GrowParams,
    sampler: &mut dyn FeatureSampler,
    leaf_value: &mut dyn FnMut(&[usize]) -> Vec<f64>,
) -> Tree {
    let mut tree = Tree { nodes: Vec::new() };
    let mut scratch = Vec::with_capacity(samples.len());
    grow_node(
        data,
        samples,
        0,
        crit,
        params,
        sampler,
        leaf_value,
        &mut tree,
        &mut scratch,
    );
    tree
}

#[allow(clippy::too_many_arguments)]
fn grow_node<C: Criterion>(
    data: &TrainSet,
    samples: Vec<usize>,
    depth: usize,
    crit: &C,
    params: &GrowParams,
    sampler: &mut dyn FeatureSampler,
    leaf_value: &mut dyn FnMut(&[usize]) -> Vec<f64>,
    tree: &mut Tree,
    scratch: &mut Vec<(f64, usize)>,
) -> u32 {
    let id = tree.nodes.len() as u32;
    let mut stats = crit.empty();
    samples.iter().for_each(|&i| crit.add(&mut stats, i));
    let stop = depth >= params.max_depth
        || samples.len() < params.min_samples_split
        || crit.is_pure(&stats);
    let split = if stop {
        None
    } else {
        let parent_cost = crit.cost(&stats);
        let mut best: Option<Split> = None;
        let mut visited = 0usize;
        sampler.start_node();
        while let Some(draw) = sampler.next() {
            visited += 1;
            if let Draw::Active(c) = draw {
                if let Some(s) = best_split_on(data, &samples, c, crit, &stats, parent_cost, scratch) {
                    if better(&s, &best) {
                        best = Some(s);
                    }
                }
            }
            if best.is_some() && visited >= sampler.max_features() {
                break;
            }
        }
        best
    };
    match split {
        None => {
            tree.nodes.push(TreeNode::Leaf {
                value: leaf_value(&samples),
            });
        }
        Some(s) => {
            tree.nodes.push(TreeNode::Leaf { value: Vec::new() });
            let (l, r): (Vec<usize>, Vec<usize>) = samples
                .iter()
                .partition(|&&i| data.x[i][s.column] <= s.threshold);
            let left = grow_node(data, l, depth + 1, crit, params, sampler, leaf_value, tree, scratch);
            let right = grow_node(data, r, depth + 1, crit, params, sampler, leaf_value, tree, scratch);
            tree.nodes[id as usize] = TreeNode::Split {
                feature: data.active[s.column],
                threshold: s.threshold,
                left,
                right,
            };
        }
    }
    id
}

/// Class frequency vector of `samples`.
pub(crate) fn class_distribution(y: &[usize], n_classes: usize, samples: &[usize]) -> Vec<f64> {
    let mut v = vec![0.0; n_classes];
    samples.iter().for_each(|&i| v[y[i]] += 1.0);
    let n = samples.len().max(1) as f64;
    v.iter_mut().for_each(|c| *c /= n);
    v
}
