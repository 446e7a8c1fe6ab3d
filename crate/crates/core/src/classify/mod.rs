//! The seven classifiers, trained from scratch on tiny support sets.
//!
//! Class labels are always put in sorted order before training, so a
//! model's predictions do not depend on how the caller enumerated classes;
//! argmax ties go to the first label in that order.

mod boost;
mod data;
mod forest;
mod linear;
mod mlp;
mod nbc;
mod svm;
mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use boost::GradientBoosting;
pub use forest::RandomForest;
pub use linear::{softmax_regression_objective, LogisticModel};
pub use mlp::{mlp_objective, MlpModel};
pub use nbc::GaussianNb;
pub use svm::SvmModel;
pub use tree::{Tree, TreeNode};

use crate::error::{Error, Result};
use crate::featurize::FeatureMatrix;
use data::{argmax, canonical_labels, softmax};

/// Version of the model JSON layout written by [`TrainedModel::to_json`].
pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lrc,
    Rfc,
    Svm,
    Nbc,
    Dtc,
    Gbc,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Lrc,
        ModelKind::Rfc,
        ModelKind::Svm,
        ModelKind::Nbc,
        ModelKind::Dtc,
        ModelKind::Gbc,
        ModelKind::Mlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lrc => "lrc",
            ModelKind::Rfc => "rfc",
            ModelKind::Svm => "svm",
            ModelKind::Nbc => "nbc",
            ModelKind::Dtc => "dtc",
            ModelKind::Gbc => "gbc",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_uppercase())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown model kind {s:?}")))
    }
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Hyperparameter(what.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LrcParams {
    pub l2: f64,
    pub step: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LrcParams {
    fn default() -> Self {
        LrcParams {
            l2: 1e-4,
            step: 0.1,
            max_iter: 1000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    pub steps: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1000.0, steps: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NbcParams {
    pub var_smoothing: f64,
}

impl Default for NbcParams {
    fn default() -> Self {
        NbcParams { var_smoothing: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DtcParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for DtcParams {
    fn default() -> Self {
        DtcParams {
            max_depth: 32,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfcParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Candidate features per split; `floor(sqrt(d))` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_features: Option<usize>,
}

impl Default for RfcParams {
    fn default() -> Self {
        RfcParams {
            n_trees: 100,
            max_depth: 32,
            min_samples_split: 2,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbcParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for GbcParams {
    fn default() -> Self {
        GbcParams {
            n_stages: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 100,
            epochs: 200,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Per-kind hyperparameters, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Hyperparams {
    Lrc(LrcParams),
    Rfc(RfcParams),
    Svm(SvmParams),
    Nbc(NbcParams),
    Dtc(DtcParams),
    Gbc(GbcParams),
    Mlp(MlpParams),
}

impl Hyperparams {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Lrc => Hyperparams::Lrc(Default::default()),
            ModelKind::Rfc => Hyperparams::Rfc(Default::default()),
            ModelKind::Svm => Hyperparams::Svm(Default::default()),
            ModelKind::Nbc => Hyperparams::Nbc(Default::default()),
            ModelKind::Dtc => Hyperparams::Dtc(Default::default()),
            ModelKind::Gbc => Hyperparams::Gbc(Default::default()),
            ModelKind::Mlp => Hyperparams::Mlp(Default::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparams::Lrc(_) => ModelKind::Lrc,
            Hyperparams::Rfc(_) => ModelKind::Rfc,
            Hyperparams::Svm(_) => ModelKind::Svm,
            Hyperparams::Nbc(_) => ModelKind::Nbc,
            Hyperparams::Dtc(_) => ModelKind::Dtc,
            Hyperparams::Gbc(_) => ModelKind::Gbc,
            Hyperparams::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Hyperparams::Lrc(p) => {
                check(p.l2.is_finite() && p.l2 >= 0.0, "lrc: l2 must be finite and >= 0")?;
                check(p.step.is_finite() && p.step > 0.0, "lrc: step must be > 0")?;
                check(p.max_iter >= 1, "lrc: max_iter must be >= 1")?;
                check(p.tol >= 0.0, "lrc: tol must be >= 0")
            }
            Hyperparams::Svm(p) => {
                check(p.c.is_finite() && p.c > 0.0, "svm: c must be > 0")?;
                check(p.steps >= 1, "svm: steps must be >= 1")
            }
            Hyperparams::Nbc(p) => check(
                p.var_smoothing.is_finite() && p.var_smoothing > 0.0,
                "nbc: var_smoothing must be > 0",
            ),
            Hyperparams::Dtc(p) => {
                check(p.max_depth >= 1, "dtc: max_depth must be >= 1")?;
                check(p.min_samples_split >= 2, "dtc: min_samples_split must be >= 2")
            }
            Hyperparams::Rfc(p) => {
                check(p.n_trees >= 1, "rfc: n_trees must be >= 1")?;
                check(p.max_depth >= 1, "rfc: max_depth must be >= 1")?;
                check(p.min_samples_split >= 2, "rfc: min_samples_split must be >= 2")?;
                check(p.max_features != Some(0), "rfc: max_features must be >= 1")
            }
            Hyperparams::Gbc(p) => {
                check(p.n_stages >= 1, "gbc: n_stages must be >= 1")?;
                check(
                    p.learning_rate.is_finite() && p.learning_rate > 0.0,
                    "gbc: learning_rate must be > 0",
                )?;
                check(p.max_depth >= 1, "gbc: max_depth must be >= 1")?;
                check(p.min_samples_split >= 2, "gbc: min_samples_split must be >= 2")
            }
            Hyperparams::Mlp(p) => {
                check(p.hidden >= 1, "mlp: hidden must be >= 1")?;
                check(p.epochs >= 1, "mlp: epochs must be >= 1")?;
                check(
                    p.learning_rate.is_finite() && p.learning_rate > 0.0,
                    "mlp: learning_rate must be > 0",
                )?;
                check((0.0..1.0).contains(&p.beta1), "mlp: beta1 must be in [0, 1)")?;
                check((0.0..1.0).contains(&p.beta2), "mlp: beta2 must be in [0, 1)")?;
                check(p.epsilon > 0.0, "mlp: epsilon must be > 0")
            }
        }
    }
}

/// What to train: a kind with its hyperparameters, an optional display
/// name, and an optional seed (0 when unset).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub params: Hyperparams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ClassifierSpec {
    pub fn new(kind: ModelKind) -> Self {
        ClassifierSpec {
            name: None,
            params: Hyperparams::default_for(kind),
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    /// `name` if set, else the upper-case kind ("LRC").
    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind().to_string())
    }
}

/// Training trace. `loss_curve` holds the per-iteration loss for lrc and
/// mlp, the per-stage training loss (starting with the prior) for gbc, and
/// the best objective per one-vs-rest problem for svm.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub loss_curve: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelState {
    Lrc(LogisticModel),
    Rfc(RandomForest),
    Svm(SvmModel),
    Nbc(GaussianNb),
    Dtc(Tree),
    Gbc(GradientBoosting),
    Mlp(MlpModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_version: u32,
    pub kind: ModelKind,
    pub class_labels: Vec<String>,
    pub feature_dim: usize,
    pub state: ModelState,
    pub diagnostics: Diagnostics,
}

/// Train on `x` with labels `y`; the class set is the distinct labels of `y`.
pub fn train<S: AsRef<str>>(spec: &ClassifierSpec, x: &FeatureMatrix, y: &[S]) -> Result<TrainedModel> {
    train_with_labels(spec, x, y, &canonical_labels(y))
}

/// Train with an explicit class set. Every label must occur in `y`; the
/// order of `labels` is ignored.
pub fn train_with_labels<S: AsRef<str>, L: AsRef<str>>(
    spec: &ClassifierSpec,
    x: &FeatureMatrix,
    y: &[S],
    labels: &[L],
) -> Result<TrainedModel> {
    spec.params.validate()?;
    let labels = canonical_labels(labels);
    let data = data::prepare(x, y, &labels)?;
    let seed = spec.seed.unwrap_or(0);
    let mut diag = Diagnostics::default();
    let state = match &spec.params {
        Hyperparams::Lrc(p) => ModelState::Lrc(linear::train(&data, p, &mut diag)),
        Hyperparams::Svm(p) => ModelState::Svm(svm::train(&data, p, &mut diag)),
        Hyperparams::Nbc(p) => ModelState::Nbc(nbc::train(&data, p)),
        Hyperparams::Dtc(p) => {
            let crit = tree::Gini {
                y: &data.y,
                n_classes: data.n_classes,
            };
            let t = tree::grow(
                &data,
                (0..data.n()).collect(),
                &crit,
                &tree::GrowParams {
                    max_depth: p.max_depth,
                    min_samples_split: p.min_samples_split,
                },
                &mut tree::AllFeatures::new(data.width()),
                &mut |s| tree::class_distribution(&data.y, data.n_classes, s),
            );
            ModelState::Dtc(t)
        }
        Hyperparams::Rfc(p) => ModelState::Rfc(forest::train(&data, p, seed)),
        Hyperparams::Gbc(p) => ModelState::Gbc(boost::train(&data, p, &mut diag)),
        Hyperparams::Mlp(p) => ModelState::Mlp(mlp::train(&data, p, seed, &mut diag)),
    };
    Ok(TrainedModel {
        schema_version: MODEL_SCHEMA_VERSION,
        kind: spec.kind(),
        class_labels: labels,
        feature_dim: data.feature_dim,
        state,
        diagnostics: diag,
    })
}

impl TrainedModel {
    fn check_dim(&self, x: &FeatureMatrix) -> Result<()> {
        if x.n_cols() != self.feature_dim {
            return Err(Error::Dimension {
                expected: self.feature_dim,
                actual: x.n_cols(),
            });
        }
        Ok(())
    }

    /// Per-row decision values whose argmax is the prediction: scores for
    /// lrc/gbc/mlp, joint log-likelihoods for nbc, margins for svm, leaf
    /// class frequencies for dtc, vote shares for rfc.
    pub fn decision_values(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        self.check_dim(x)?;
        Ok(match &self.state {
            ModelState::Lrc(m) => x.rows().map(|r| m.scores(r)).collect(),
            ModelState::Svm(m) => x.rows().map(|r| m.margins(r)).collect(),
            ModelState::Nbc(m) => x.rows().map(|r| m.joint_log_likelihood(r)).collect(),
            ModelState::Dtc(t) => x.rows().map(|r| t.leaf(r).to_vec()).collect(),
            ModelState::Rfc(m) => x.rows().map(|r| m.votes(r)).collect(),
            ModelState::Gbc(m) => x.rows().map(|r| m.scores(r)).collect(),
            ModelState::Mlp(m) => m.scores_matrix(x),
        })
    }

    /// One label per row.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<String>> {
        Ok(self
            .decision_values(x)?
            .iter()
            .map(|d| self.class_labels[argmax(d)].clone())
            .collect())
    }

    /// Per-row distribution over `class_labels`. For svm this is a softmax
    /// over the margins: a score, not a calibrated probability.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        let d = self.decision_values(x)?;
        Ok(match self.state {
            ModelState::Dtc(_) | ModelState::Rfc(_) => d,
            _ => d.iter().map(|v| softmax(v)).collect(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(s)?;
        if m.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "model schema version {} (expected {MODEL_SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
