//! Document featurizers: TF-IDF over words or character n-grams, averaged
//! pretrained word vectors (with optional subword composition), and
//! precomputed document vectors.
//!
//! [`FeaturizerSpec`] is the configuration form; [`Featurizer`] bundles a
//! spec with its loaded resources and fits into a [`Fitted`] transformer.

mod dense;
mod matrix;
mod tfidf;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use dense::{doc_vector_features, embed_average};
pub use matrix::{read_matrix_jsonl, write_matrix_jsonl, FeatureMatrix, RowView, SparseRow, Storage};
pub use tfidf::{fit_tfidf, fit_tfidf_texts, tfidf_row, transform_tfidf, Analyzer, TfidfModel, Vocabulary};

use crate::corpus::Document;
use crate::embedio::{self, DocVectorFile, EmbeddingTable, LoadOptions, SubwordModel};
use crate::error::{Error, Result};
use crate::tokenize::{word_tokenize, NormConfig};

/// Which documents TF-IDF statistics are fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitScope {
    /// All support and query text; labels are never read.
    #[default]
    Transductive,
    /// Support documents only.
    Support,
}

fn default_char_min() -> usize {
    2
}
fn default_char_max() -> usize {
    4
}
fn default_bucket_count() -> usize {
    embedio::DEFAULT_BUCKET_COUNT
}
fn default_sub_min() -> usize {
    embedio::DEFAULT_SUBWORD_MIN
}
fn default_sub_max() -> usize {
    embedio::DEFAULT_SUBWORD_MAX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeaturizerKind {
    /// Word-level TF-IDF.
    Bow,
    /// Character n-gram TF-IDF.
    CharNgrams {
        #[serde(default = "default_char_min")]
        n_min: usize,
        #[serde(default = "default_char_max")]
        n_max: usize,
    },
    Word2vec {
        path: PathBuf,
        #[serde(default)]
        binary: bool,
    },
    Glove {
        path: PathBuf,
    },
    /// fastText `.vec` words plus hashed subword buckets, read from
    /// `buckets_path` when given and seeded otherwise.
    Fasttext {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        buckets_path: Option<PathBuf>,
        #[serde(default = "default_bucket_count")]
        bucket_count: usize,
        #[serde(default = "default_sub_min")]
        n_min: usize,
        #[serde(default = "default_sub_max")]
        n_max: usize,
        #[serde(default)]
        bucket_seed: u64,
    },
    /// Precomputed contextual document vectors (JSONL).
    DocVectors {
        path: PathBuf,
    },
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturizerSpec {
    /// Display name in reports; defaults to [`FeaturizerKind::default_name`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: FeaturizerKind,
    #[serde(default)]
    pub norm: NormConfig,
    /// Load only word vectors for tokens that occur in the corpora.
    #[serde(default = "default_true")]
    pub vocab_filter: bool,
}

impl FeaturizerKind {
    pub fn default_name(&self) -> &'static str {
        match self {
            FeaturizerKind::Bow => "BoW + TF-IDF",
            FeaturizerKind::CharNgrams { .. } => "Character n-grams",
            FeaturizerKind::Word2vec { .. } => "Word2Vec",
            FeaturizerKind::Glove { .. } => "GloVe",
            FeaturizerKind::Fasttext { .. } => "fastText",
            FeaturizerKind::DocVectors { .. } => "Document vectors",
        }
    }

    /// Files this featurizer reads.
    pub fn resource_paths(&self) -> Vec<&Path> {
        match self {
            FeaturizerKind::Bow | FeaturizerKind::CharNgrams { .. } => vec![],
            FeaturizerKind::Word2vec { path, .. }
            | FeaturizerKind::Glove { path }
            | FeaturizerKind::DocVectors { path } => vec![path.as_path()],
            FeaturizerKind::Fasttext {
                path, buckets_path, ..
            } => std::iter::once(path.as_path())
                .chain(buckets_path.as_deref())
                .collect(),
        }
    }

    pub fn resource_paths_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            FeaturizerKind::Bow | FeaturizerKind::CharNgrams { .. } => vec![],
            FeaturizerKind::Word2vec { path, .. }
            | FeaturizerKind::Glove { path }
            | FeaturizerKind::DocVectors { path } => vec![path],
            FeaturizerKind::Fasttext {
                path, buckets_path, ..
            } => std::iter::once(path).chain(buckets_path.as_mut()).collect(),
        }
    }
}

impl FeaturizerSpec {
    pub fn new(kind: FeaturizerKind) -> Self {
        FeaturizerSpec {
            name: None,
            kind,
            norm: NormConfig::default(),
            vocab_filter: true,
        }
    }

    pub fn display_name(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.kind.default_name().to_owned())
    }

    /// Parameter checks that need no file access.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            FeaturizerKind::CharNgrams { n_min, n_max } => {
                crate::tokenize::check_ngram_range(*n_min, *n_max)
            }
            FeaturizerKind::Fasttext {
                bucket_count,
                n_min,
                n_max,
                ..
            } => {
                if *bucket_count == 0 {
                    return Err(Error::Config("fasttext bucket_count must be positive".into()));
                }
                crate::tokenize::check_ngram_range(*n_min, *n_max)
            }
            _ => Ok(()),
        }
    }

    /// Load word vectors or document vectors. `vocab` restricts word tables
    /// when `vocab_filter` is set.
    pub fn load(&self, vocab: Option<&HashSet<String>>) -> Result<Featurizer> {
        self.validate()?;
        let opts = LoadOptions {
            vocab_filter: if self.vocab_filter { vocab.cloned() } else { None },
        };
        let resource = match &self.kind {
            FeaturizerKind::Bow | FeaturizerKind::CharNgrams { .. } => Resource::None,
            FeaturizerKind::Word2vec { path, binary } => {
                Resource::Table(Arc::new(embedio::parse_word2vec_with(path, *binary, &opts)?))
            }
            FeaturizerKind::Glove { path } => {
                Resource::Table(Arc::new(embedio::parse_glove_with(path, &opts)?))
            }
            FeaturizerKind::Fasttext {
                path,
                buckets_path,
                bucket_count,
                n_min,
                n_max,
                bucket_seed,
            } => {
                let table = embedio::parse_fasttext_vec_with(path, &opts)?;
                let model = match buckets_path {
                    Some(bp) => {
                        let (dim, data) = embedio::load_buckets(bp)?;
                        if dim != table.dim() {
                            return Err(Error::Config(format!(
                                "bucket file {} has dim {dim}, word vectors have {}",
                                bp.display(),
                                table.dim()
                            )));
                        }
                        SubwordModel::with_buckets(table, data, *n_min, *n_max)?
                    }
                    None => SubwordModel::seeded(table, *bucket_count, *n_min, *n_max, *bucket_seed)?,
                };
                Resource::Subword(Arc::new(model))
            }
            FeaturizerKind::DocVectors { path } => {
                Resource::DocVectors(Arc::new(embedio::load_doc_vectors(path)?))
            }
        };
        Ok(Featurizer {
            spec: self.clone(),
            resource,
        })
    }
}

/// Distinct word tokens of `docs`, for vocabulary-filtered loading.
pub fn corpus_vocabulary<'a>(docs: impl IntoIterator<Item = &'a Document>, cfg: &NormConfig) -> HashSet<String> {
    docs.into_iter()
        .flat_map(|d| word_tokenize(&d.text, cfg))
        .collect()
}

#[derive(Debug, Clone)]
enum Resource {
    None,
    Table(Arc<EmbeddingTable>),
    Subword(Arc<SubwordModel>),
    DocVectors(Arc<DocVectorFile>),
}

/// A featurizer spec with its resources loaded; cheap to clone.
#[derive(Debug, Clone)]
pub struct Featurizer {
    spec: FeaturizerSpec,
    resource: Resource,
}

impl Featurizer {
    pub fn spec(&self) -> &FeaturizerSpec {
        &self.spec
    }

    /// Fit on `docs`. Only the TF-IDF kinds learn anything.
    pub fn fit(&self, docs: &[Document]) -> Result<Fitted> {
        let norm = self.spec.norm;
        Ok(match (&self.spec.kind, &self.resource) {
            (FeaturizerKind::Bow, _) => Fitted::Tfidf(fit_tfidf(docs, Analyzer::Word, &norm)?),
            (FeaturizerKind::CharNgrams { n_min, n_max }, _) => Fitted::Tfidf(fit_tfidf(
                docs,
                Analyzer::Char {
                    n_min: *n_min,
                    n_max: *n_max,
                },
                &norm,
            )?),
            (_, Resource::Table(t)) => Fitted::Embedding {
                table: Arc::clone(t),
                norm,
            },
            (_, Resource::Subword(m)) => Fitted::Subword {
                model: Arc::clone(m),
                norm,
            },
            (_, Resource::DocVectors(d)) => Fitted::DocVectors(Arc::clone(d)),
            (kind, Resource::None) => {
                return Err(Error::Invalid(format!("featurizer {kind:?} has no loaded resource")))
            }
        })
    }
}

/// A fitted featurizer.
#[derive(Debug, Clone)]
pub enum Fitted {
    Tfidf(TfidfModel),
    Embedding { table: Arc<EmbeddingTable>, norm: NormConfig },
    Subword { model: Arc<SubwordModel>, norm: NormConfig },
    DocVectors(Arc<DocVectorFile>),
}

impl Fitted {
    pub fn transform(&self, docs: &[Document]) -> Result<FeatureMatrix> {
        match self {
            Fitted::Tfidf(m) => transform_tfidf(m, docs),
            Fitted::Embedding { table, norm } => embed_average(docs, table, None, norm),
            Fitted::Subword { model, norm } => embed_average(docs, &model.table, Some(model), norm),
            Fitted::DocVectors(d) => doc_vector_features(docs, d),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Fitted::Tfidf(m) => m.n_features(),
            Fitted::Embedding { table, .. } => table.dim(),
            Fitted::Subword { model, .. } => model.table.dim(),
            Fitted::DocVectors(d) => d.dim(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_from_toml() {
        let s: FeaturizerSpec = toml::from_str("kind = \"char_ngrams\"\nn_max = 5\n").unwrap();
        assert_eq!(s.kind, FeaturizerKind::CharNgrams { n_min: 2, n_max: 5 });
        assert_eq!(s.display_name(), "Character n-grams");
        assert!(s.vocab_filter);

        let s: FeaturizerSpec =
            toml::from_str("kind = \"fasttext\"\npath = \"x.vec\"\nname = \"ft\"\n").unwrap();
        match s.kind {
            FeaturizerKind::Fasttext {
                bucket_count,
                n_min,
                n_max,
                ..
            } => assert_eq!((bucket_count, n_min, n_max), (2_000_000, 3, 6)),
            k => panic!("{k:?}"),
        }
        assert_eq!(s.display_name(), "ft");
    }

    #[test]
    fn bad_char_range_rejected() {
        let s = FeaturizerSpec::new(FeaturizerKind::CharNgrams { n_min: 4, n_max: 2 });
        assert!(s.validate().is_err());
    }

    #[test]
    fn bow_fit_transform() {
        let docs: Vec<Document> = ["hello world", "hello there"]
            .iter()
            .enumerate()
            .map(|(i, t)| Document {
                id: i.to_string(),
                text: t.to_string(),
                label: "x".into(),
            })
            .collect();
        let f = FeaturizerSpec::new(FeaturizerKind::Bow).load(None).unwrap();
        let fitted = f.fit(&docs).unwrap();
        assert_eq!(fitted.n_features(), 3);
        let m = fitted.transform(&docs).unwrap();
        assert_eq!(m.n_rows(), 2);
        assert!(m.is_sparse());
    }
}
