use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::matrix::{FeatureMatrix, SparseRow};
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::tokenize::{self, NormConfig};

/// What counts as a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "analyzer", rename_all = "lowercase")]
pub enum Analyzer {
    Word,
    Char { n_min: usize, n_max: usize },
}

impl Analyzer {
    pub fn terms(&self, text: &str, cfg: &NormConfig) -> Result<Vec<String>> {
        match *self {
            Analyzer::Word => Ok(tokenize::word_tokenize(text, cfg)),
            Analyzer::Char { n_min, n_max } => tokenize::char_ngrams(text, n_min, n_max, cfg),
        }
    }
}

/// Lexicographically ordered terms with document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    document_frequency: Vec<u32>,
    n_docs_fitted: usize,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

#[derive(Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    document_frequency: Vec<u32>,
    n_docs_fitted: usize,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            terms: r.terms,
            document_frequency: r.document_frequency,
            n_docs_fitted: r.n_docs_fitted,
            index,
        }
    }
}

impl Vocabulary {
    fn from_counts(df: BTreeMap<String, u32>, n_docs: usize) -> Self {
        let mut terms = Vec::with_capacity(df.len());
        let mut document_frequency = Vec::with_capacity(df.len());
        let mut index = HashMap::with_capacity(df.len());
        for (i, (t, c)) in df.into_iter().enumerate() {
            index.insert(t.clone(), i as u32);
            terms.push(t);
            document_frequency.push(c);
        }
        Vocabulary {
            terms,
            document_frequency,
            n_docs_fitted: n_docs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&i| i as usize)
    }

    pub fn document_frequency(&self, term: &str) -> Option<u32> {
        self.column(term).map(|i| self.document_frequency[i])
    }

    pub fn n_docs_fitted(&self) -> usize {
        self.n_docs_fitted
    }
}

/// Fitted TF-IDF weighting.
///
/// `idf[t] = ln((1 + N) / (1 + df[t])) + 1`; rows are raw term counts times
/// idf, then L2-normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocabulary: Vocabulary,
    pub analyzer: Analyzer,
    pub norm: NormConfig,
    idf: Vec<f64>,
}

impl TfidfModel {
    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn idf_of(&self, term: &str) -> Option<f64> {
        self.vocabulary.column(term).map(|i| self.idf[i])
    }

    pub fn n_features(&self) -> usize {
        self.vocabulary.len()
    }
}

pub fn fit_tfidf(docs: &[Document], analyzer: Analyzer, cfg: &NormConfig) -> Result<TfidfModel> {
    fit_tfidf_texts(docs.iter().map(|d| d.text.as_str()), analyzer, cfg)
}

pub fn fit_tfidf_texts<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    analyzer: Analyzer,
    cfg: &NormConfig,
) -> Result<TfidfModel> {
    let mut df: BTreeMap<String, u32> = BTreeMap::new();
    let mut n_docs = 0usize;
    for text in texts {
        n_docs += 1;
        let mut terms = analyzer.terms(text, cfg)?;
        terms.sort_unstable();
        terms.dedup();
        for t in terms {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    if n_docs == 0 {
        return Err(Error::Invalid("cannot fit TF-IDF on an empty corpus".into()));
    }
    let vocabulary = Vocabulary::from_counts(df, n_docs);
    let n = n_docs as f64;
    let idf = vocabulary
        .document_frequency
        .iter()
        .map(|&d| ((1.0 + n) / (1.0 + f64::from(d))).ln() + 1.0)
        .collect();
    Ok(TfidfModel {
        vocabulary,
        analyzer,
        norm: *cfg,
        idf,
    })
}

/// One L2-normalized TF-IDF row; out-of-vocabulary terms are ignored.
pub fn tfidf_row(model: &TfidfModel, text: &str) -> Result<SparseRow> {
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for t in model.analyzer.terms(text, &model.norm)? {
        if let Some(&j) = model.vocabulary.index.get(&t) {
            *counts.entry(j).or_insert(0) += 1;
        }
    }
    let mut pairs: Vec<(u32, f64)> = counts
        .into_iter()
        .map(|(j, c)| (j, f64::from(c) * model.idf[j as usize]))
        .collect();
    pairs.sort_unstable_by_key(|p| p.0);
    let norm = pairs.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        pairs.iter_mut().for_each(|p| p.1 /= norm);
    }
    Ok(SparseRow {
        indices: pairs.iter().map(|p| p.0).collect(),
        values: pairs.iter().map(|p| p.1).collect(),
    })
}

pub fn transform_tfidf(model: &TfidfModel, docs: &[Document]) -> Result<FeatureMatrix> {
    let rows = docs
        .iter()
        .map(|d| tfidf_row(model, &d.text))
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::sparse(
        model.n_features(),
        docs.iter().map(|d| d.id.clone()).collect(),
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn docs(texts: &[&str]) -> Vec<Document> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document {
                id: format!("d{i}"),
                text: t.to_string(),
                label: "x".into(),
            })
            .collect()
    }

    fn word() -> Analyzer {
        Analyzer::Word
    }

    fn single_chars() -> NormConfig {
        NormConfig {
            min_token_chars: 1,
            ..NormConfig::default()
        }
    }

    #[test]
    fn two_doc_fit_matches_hand_values() {
        let m = fit_tfidf(&docs(&["a b", "b c"]), word(), &single_chars()).unwrap();
        assert_eq!(m.vocabulary.terms(), ["a", "b", "c"]);
        assert_eq!(m.vocabulary.document_frequency("a"), Some(1));
        assert_eq!(m.vocabulary.document_frequency("b"), Some(2));
        assert_eq!(m.vocabulary.document_frequency("c"), Some(1));
        assert_eq!(m.idf_of("b"), Some(1.0));
        let expected_a = (3.0f64 / 2.0).ln() + 1.0;
        assert!((m.idf_of("a").unwrap() - expected_a).abs() < 1e-12);
    }

    #[test]
    fn default_tokenizer_drops_single_letters() {
        let m = fit_tfidf(&docs(&["a b", "bb cc"]), word(), &NormConfig::default()).unwrap();
        assert_eq!(m.vocabulary.terms(), ["bb", "cc"]);
    }

    #[test]
    fn single_doc_idf_is_one() {
        let m = fit_tfidf(&docs(&["x x x"]), word(), &single_chars()).unwrap();
        assert_eq!(m.vocabulary.len(), 1);
        assert_eq!(m.idf_of("x"), Some(1.0));
    }

    #[test]
    fn disjoint_vocab_union() {
        let m = fit_tfidf(
            &docs(&["aa bb cc", "dd ee ff gg"]),
            word(),
            &NormConfig::default(),
        )
        .unwrap();
        assert_eq!(m.vocabulary.len(), 7);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(fit_tfidf(&[], word(), &NormConfig::default()).is_err());
    }

    #[test]
    fn repeated_term_row_is_unit() {
        let m = fit_tfidf(&docs(&["a b", "b c"]), word(), &single_chars()).unwrap();
        let x = transform_tfidf(&m, &docs(&["b b"])).unwrap();
        let r = x.row(0);
        assert_eq!(r.get(1), 1.0);
        assert_eq!(r.get(0), 0.0);
        assert_eq!(r.get(2), 0.0);
    }

    #[test]
    fn oov_only_gives_zero_row() {
        let m = fit_tfidf(&docs(&["aa bb", "bb cc"]), word(), &NormConfig::default()).unwrap();
        let x = transform_tfidf(&m, &docs(&["zz yy"])).unwrap();
        assert_eq!(x.row(0).norm(), 0.0);
    }

    #[test]
    fn mixed_row_hand_values() {
        let m = fit_tfidf(&docs(&["a b", "b c"]), word(), &single_chars()).unwrap();
        let x = transform_tfidf(&m, &docs(&["a b"])).unwrap();
        let ia = (1.5f64).ln() + 1.0;
        let n = (ia * ia + 1.0).sqrt();
        let r = x.row(0);
        assert!((r.get(0) - ia / n).abs() < 1e-12);
        assert!((r.get(1) - 1.0 / n).abs() < 1e-12);
        assert!((r.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn char_analyzer_vocab() {
        let m = fit_tfidf(
            &docs(&["abc"]),
            Analyzer::Char { n_min: 2, n_max: 3 },
            &NormConfig::default(),
        )
        .unwrap();
        assert_eq!(m.vocabulary.terms(), ["ab", "abc", "bc"]);
    }

    proptest! {
        #[test]
        fn rows_unit_or_zero(texts in proptest::collection::vec("[a-e ]{0,30}", 1..8), probe in "[a-f ]{0,30}") {
            let fit_docs = docs(&texts.iter().map(String::as_str).collect::<Vec<_>>());
            for analyzer in [Analyzer::Word, Analyzer::Char { n_min: 2, n_max: 4 }] {
                let m = fit_tfidf(&fit_docs, analyzer, &NormConfig::default()).unwrap();
                let x = transform_tfidf(&m, &docs(&[probe.as_str()])).unwrap();
                let n = x.row(0).norm();
                prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-12);
                for (i, t) in texts.iter().enumerate() {
                    let own = transform_tfidf(&m, &fit_docs[i..=i]).unwrap();
                    let has_terms = !analyzer.terms(t, &NormConfig::default()).unwrap().is_empty();
                    prop_assert_eq!(own.row(0).norm() > 0.0, has_terms);
                }
                for &d in &m.vocabulary.document_frequency {
                    prop_assert!(d >= 1 && d as usize <= texts.len());
                }
            }
        }
    }
}
