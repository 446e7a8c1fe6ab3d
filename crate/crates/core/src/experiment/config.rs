//! Grid configuration (TOML).
//!
//! ```toml
//! repeats = 20          # one-shot splits per cell; split r uses seed base_seed + r
//! base_seed = 42
//! output_dir = "out"
//! averaging = "weighted" # or "macro", "micro"
//! fit_scope = "transductive" # or "support"
//! jobs = 4              # worker threads; default: available parallelism
//!
//! [[datasets]]
//! name = "DC"
//! path = "dc.csv"       # format from the extension unless `format` is set
//!
//! [[featurizers]]
//! kind = "char_ngrams"  # bow | char_ngrams | word2vec | glove | fasttext | doc_vectors
//! n_min = 2
//! n_max = 4
//!
//! [[models]]
//! kind = "svm"          # lrc | rfc | svm | nbc | dtc | gbc | mlp
//! c = 1000.0
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::ClassifierSpec;
use crate::corpus::Format;
use crate::error::{Error, Result};
use crate::featurize::{FeaturizerSpec, FitScope};
use crate::metrics::Averaging;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl DatasetSpec {
    pub fn format(&self) -> Format {
        self.format.unwrap_or_else(|| Format::from_path(&self.path))
    }
}

fn default_repeats() -> usize {
    20
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Unset means "pick one": the CLI draws an entropy seed and records it.
    /// The library treats unset as 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub averaging: Averaging,
    #[serde(default)]
    pub fit_scope: FitScope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    pub datasets: Vec<DatasetSpec>,
    pub featurizers: Vec<FeaturizerSpec>,
    pub models: Vec<ClassifierSpec>,
}

impl GridConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parse `path` and resolve relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        for d in &mut self.datasets {
            fix(&mut d.path);
        }
        for f in &mut self.featurizers {
            for p in f.kind.resource_paths_mut() {
                fix(p);
            }
        }
    }

    /// Canonical TOML form (every default spelled out).
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed.unwrap_or(0)
    }

    /// Structural checks, featurizer parameter checks, and existence of
    /// every referenced file. Model hyperparameters are checked when each
    /// cell trains, so a bad value fails only its own cells.
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        for (what, empty) in [
            ("datasets", self.datasets.is_empty()),
            ("featurizers", self.featurizers.is_empty()),
            ("models", self.models.is_empty()),
        ] {
            if empty {
                return Err(Error::Config(format!("no {what} configured")));
            }
        }
        unique("dataset", self.datasets.iter().map(|d| d.name.clone()))?;
        unique("featurizer", self.featurizers.iter().map(|f| f.display_name()))?;
        unique("model", self.models.iter().map(|m| m.display_name()))?;
        for f in &self.featurizers {
            f.validate()
                .map_err(|e| Error::Config(format!("featurizer {}: {e}", f.display_name())))?;
        }
        let files = self
            .datasets
            .iter()
            .map(|d| d.path.as_path())
            .chain(self.featurizers.iter().flat_map(|f| f.kind.resource_paths()));
        for p in files {
            if !p.is_file() {
                return Err(Error::Config(format!("file not found: {}", p.display())));
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.datasets.len() * self.featurizers.len() * self.models.len()
    }
}

fn unique(what: &str, names: impl Iterator<Item = String>) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.clone()) {
            return Err(Error::Config(format!(
                "duplicate {what} name {n:?}; set `name` to tell them apart"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{Hyperparams, ModelKind};

    const TOY: &str = r#"
repeats = 3
base_seed = 9

[[datasets]]
name = "DC"
path = "dc.csv"

[[featurizers]]
kind = "bow"

[[featurizers]]
kind = "fasttext"
path = "ft.vec"
bucket_count = 64

[[models]]
kind = "rfc"
n_trees = 7

[[models]]
kind = "nbc"
"#;

    #[test]
    fn parses_and_round_trips() {
        let mut c = GridConfig::from_toml_str(TOY).unwrap();
        assert_eq!(c.repeats, 3);
        assert_eq!(c.averaging, Averaging::Weighted);
        assert_eq!(c.fit_scope, FitScope::Transductive);
        assert_eq!(c.models[0].kind(), ModelKind::Rfc);
        assert!(matches!(&c.models[0].params, Hyperparams::Rfc(p) if p.n_trees == 7));
        assert_eq!(c.n_cells(), 4);
        let again = GridConfig::from_toml_str(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
        c.resolve_paths(Path::new("/data"));
        assert_eq!(c.datasets[0].path, Path::new("/data/dc.csv"));
        assert_eq!(c.featurizers[1].kind.resource_paths(), vec![Path::new("/data/ft.vec")]);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(GridConfig::from_toml_str(&TOY.replace("n_trees", "trees")).is_err());
        assert!(GridConfig::from_toml_str(&TOY.replace("repeats = 3", "repeat = 3")).is_err());
        let c = GridConfig::from_toml_str(&TOY.replace("kind = \"nbc\"", "kind = \"rfc\"")).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(m)) if m.contains("duplicate model")));
        let c = GridConfig::from_toml_str(TOY).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(m)) if m.contains("dc.csv")));
    }
}
