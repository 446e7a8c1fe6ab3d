use rayon::prelude::*;

use super::matrix::FeatureMatrix;
use crate::corpus::Document;
use crate::embedio::{DocVectorFile, EmbeddingTable, SubwordModel};
use crate::error::{Error, Result};
use crate::tokenize::{word_tokenize, NormConfig};

/// Mean of the document's token vectors.
///
/// Tokens missing from `table` are composed from subwords when `subword` is
/// given and skipped otherwise. Documents with no resolvable token become
/// zero rows (logged). Rows are computed in parallel on the current rayon
/// pool; each row depends only on its document, so the result does not
/// depend on the pool size.
pub fn embed_average(
    docs: &[Document],
    table: &EmbeddingTable,
    subword: Option<&SubwordModel>,
    cfg: &NormConfig,
) -> Result<FeatureMatrix> {
    if table.is_empty() && subword.is_none() {
        return Err(Error::Invalid("embedding table is empty".into()));
    }
    let dim = table.dim();
    let rows: Vec<Vec<f64>> = docs
        .par_iter()
        .map(|d| average_tokens(&word_tokenize(&d.text, cfg), table, subword, dim))
        .collect();
    for (d, r) in docs.iter().zip(&rows) {
        if r.iter().all(|v| *v == 0.0) {
            log::warn!("document {:?} has no resolvable tokens; using a zero vector", d.id);
        }
    }
    FeatureMatrix::dense(dim, docs.iter().map(|d| d.id.clone()).collect(), rows)
}

fn average_tokens(
    tokens: &[String],
    table: &EmbeddingTable,
    subword: Option<&SubwordModel>,
    dim: usize,
) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    let mut n = 0usize;
    for t in tokens {
        let owned;
        let v = match table.get(t) {
            Some(v) => v,
            None => match subword.and_then(|m| m.subword_vector(t)) {
                Some(v) => {
                    owned = v;
                    &owned[..]
                }
                None => continue,
            },
        };
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
        n += 1;
    }
    if n > 0 {
        let n = n as f64;
        acc.iter_mut().for_each(|a| *a /= n);
    }
    acc
}

/// Copy each document's precomputed vector, in document order.
pub fn doc_vector_features(docs: &[Document], dvf: &DocVectorFile) -> Result<FeatureMatrix> {
    let rows = docs
        .iter()
        .map(|d| {
            dvf.get(&d.id).map(<[f64]>::to_vec).ok_or_else(|| Error::DocVector {
                id: d.id.clone(),
                message: "missing from document-vector file".into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::dense(dvf.dim(), docs.iter().map(|d| d.id.clone()).collect(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedio::SourceKind;
    use proptest::prelude::*;

    fn doc(id: &str, text: &str) -> Document {
        Document {
            id: id.into(),
            text: text.into(),
            label: "l".into(),
        }
    }

    fn table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2, SourceKind::Glove);
        t.insert("a", &[1.0, 0.0]).unwrap();
        t.insert("b", &[0.0, 1.0]).unwrap();
        t
    }

    fn single() -> NormConfig {
        NormConfig {
            min_token_chars: 1,
            ..NormConfig::default()
        }
    }

    #[test]
    fn mean_of_basis_vectors() {
        let m = embed_average(&[doc("1", "a b")], &table(), None, &single()).unwrap();
        assert_eq!(m.row(0).to_dense(2), vec![0.5, 0.5]);
    }

    #[test]
    fn repeated_token() {
        let m = embed_average(&[doc("1", "a a")], &table(), None, &single()).unwrap();
        assert_eq!(m.row(0).to_dense(2), vec![1.0, 0.0]);
    }

    #[test]
    fn oov_skipped_without_subwords() {
        let m = embed_average(&[doc("1", "a q b")], &table(), None, &single()).unwrap();
        assert_eq!(m.row(0).to_dense(2), vec![0.5, 0.5]);
    }

    #[test]
    fn all_oov_is_zero_row() {
        let m = embed_average(&[doc("1", "zz yy"), doc("2", "a")], &table(), None, &single()).unwrap();
        assert_eq!(m.zero_rows(), vec!["1".to_string()]);
    }

    #[test]
    fn oov_composed_from_subwords() {
        let sm = SubwordModel::with_buckets(table(), vec![2.0, 2.0], 3, 6).unwrap();
        let m = embed_average(&[doc("1", "a zz")], &sm.table, Some(&sm), &single()).unwrap();
        assert_eq!(m.row(0).to_dense(2), vec![1.5, 1.0]);
    }

    #[test]
    fn doc_vectors_in_doc_order() {
        let mut f = DocVectorFile::new(2);
        f.insert("x", vec![1.0, 2.0]).unwrap();
        f.insert("y", vec![3.0, 4.0]).unwrap();
        f.insert("z", vec![5.0, 6.0]).unwrap();
        let docs = [doc("z", "t"), doc("x", "t"), doc("y", "t")];
        let m = doc_vector_features(&docs, &f).unwrap();
        assert_eq!(m.row_ids(), ["z", "x", "y"]);
        assert_eq!(m.row(0).to_dense(2), vec![5.0, 6.0]);

        let mut g = DocVectorFile::new(2);
        g.insert("y", vec![3.0, 4.0]).unwrap();
        g.insert("z", vec![5.0, 6.0]).unwrap();
        g.insert("x", vec![1.0, 2.0]).unwrap();
        assert_eq!(doc_vector_features(&docs, &g).unwrap(), m);
    }

    #[test]
    fn missing_doc_vector_named() {
        let mut f = DocVectorFile::new(1);
        f.insert("x", vec![1.0]).unwrap();
        let err = doc_vector_features(&[doc("x", "t"), doc("nope", "t")], &f).unwrap_err();
        assert!(err.to_string().contains("nope"));
    }

    proptest! {
        #[test]
        fn token_order_invariant(words in proptest::collection::vec(0usize..5, 1..12), seed: u64) {
            let mut t = EmbeddingTable::new(3, SourceKind::Glove);
            let vocab = ["aa", "bb", "cc", "dd", "ee"];
            for (i, w) in vocab.iter().enumerate().take(4) {
                t.insert(*w, &[i as f64 * 0.5, 1.0 / (i as f64 + 1.0), -(i as f64)]).unwrap();
            }
            let text: Vec<&str> = words.iter().map(|&i| vocab[i]).collect();
            let mut shuffled = text.clone();
            crate::rng::Xoshiro256StarStar::seed_from_u64(seed).shuffle(&mut shuffled);
            let cfg = NormConfig::default();
            let a = embed_average(&[doc("1", &text.join(" "))], &t, None, &cfg).unwrap();
            let b = embed_average(&[doc("1", &shuffled.join(" "))], &t, None, &cfg).unwrap();
            for (x, y) in a.row(0).to_dense(3).iter().zip(b.row(0).to_dense(3)) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
