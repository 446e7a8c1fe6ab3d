//! Seeded synthetic corpora and embedding files for demos and tests.
//!
//! Each class draws its content words from its own vocabulary, built from
//! syllables over a class-specific consonant set, mixed with filler words
//! shared by every class. Classes are therefore separable by both words and
//! character n-grams.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::corpus::{
    build_tasks, write_documents, write_source, Corpus, Document, Format, SourceRow, ThreeWaySource,
};
use crate::embedio::{
    write_doc_vectors, write_fasttext_vec, write_glove, write_word2vec_binary, DocVectorFile, EmbeddingTable,
    SourceKind,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Xoshiro256StarStar};
use crate::tokenize::{word_tokenize, NormConfig};

const CONSONANTS: [&str; 18] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "ch", "sh", "th", "ph",
];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const FILLER: [&str; 12] = [
    "the", "and", "with", "patient", "should", "your", "for", "this", "can", "may", "have", "you",
];

/// Largest number of classes with disjoint consonant sets.
pub const MAX_CLASSES: usize = 6;

/// Content vocabulary of class `class`: `size` distinct words.
pub fn class_vocabulary(class: usize, size: usize, seed: u64) -> Vec<String> {
    assert!(class < MAX_CLASSES, "at most {MAX_CLASSES} synthetic classes");
    let cons = &CONSONANTS[class * 3..class * 3 + 3];
    let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(&[seed, 0x766f63, class as u64]));
    let mut words = BTreeSet::new();
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let syllables = 2 + rng.index(3);
        let w: String = (0..syllables)
            .map(|_| format!("{}{}", cons[rng.index(3)], VOWELS[rng.index(5)]))
            .collect();
        if words.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn sentence(rng: &mut Xoshiro256StarStar, vocab: &[&[String]], len: usize) -> String {
    let mut words = Vec::with_capacity(len);
    for _ in 0..len {
        if rng.next_f64() < 0.3 {
            words.push(FILLER[rng.index(FILLER.len())].to_owned());
        } else {
            let v = vocab[rng.index(vocab.len())];
            words.push(v[rng.index(v.len())].clone());
        }
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push('.');
    s
}

/// `n_classes` labels (`class_0`, ...) with `per_class` documents each,
/// interleaved by class.
pub fn class_corpus(name: &str, n_classes: usize, per_class: usize, seed: u64) -> Result<Corpus> {
    if !(2..=MAX_CLASSES).contains(&n_classes) {
        return Err(Error::Invalid(format!("n_classes must be in 2..={MAX_CLASSES}")));
    }
    let vocabs: Vec<Vec<String>> = (0..n_classes).map(|c| class_vocabulary(c, 40, seed)).collect();
    let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(&[seed, 0x646f63]));
    let mut docs = Vec::with_capacity(n_classes * per_class);
    for i in 0..per_class {
        for (c, v) in vocabs.iter().enumerate() {
            let len = 8 + rng.index(13);
            docs.push(Document {
                id: format!("d{i}_{c}"),
                text: sentence(&mut rng, &[v], len),
                label: format!("class_{c}"),
            });
        }
    }
    Corpus::new(name, docs)
}

/// A three-way source of `rows` rows. Doctor and chatbot answers use
/// separate vocabularies; rephrasings mix doctor words with their own.
pub fn three_way_source(rows: usize, seed: u64) -> ThreeWaySource {
    let doctor = class_vocabulary(0, 60, seed);
    let chatbot = class_vocabulary(1, 60, seed);
    let rephrase = class_vocabulary(2, 60, seed);
    let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(&[seed, 0x737263]));
    let rows = (0..rows)
        .map(|i| {
            let mut len = || 8 + rng.index(13);
            let (a, b, c) = (len(), len(), len());
            SourceRow {
                id: format!("r{i}"),
                doctor: sentence(&mut rng, &[&doctor], a),
                chatgpt: sentence(&mut rng, &[&chatbot], b),
                rephrased: sentence(&mut rng, &[&doctor, &rephrase], c),
            }
        })
        .collect();
    ThreeWaySource { rows }
}

/// Random table over `tokens`: independent standard normal components.
pub fn random_table<'a>(
    tokens: impl IntoIterator<Item = &'a str>,
    dim: usize,
    kind: SourceKind,
    seed: u64,
) -> EmbeddingTable {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut t = EmbeddingTable::new(dim, kind);
    for tok in tokens {
        let v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        if t.get(tok).is_none() {
            t.insert(tok, &v).expect("finite vector of the right dimension");
        }
    }
    t
}

/// Sorted distinct word tokens of the given corpora.
pub fn vocabulary_of<'a>(corpora: impl IntoIterator<Item = &'a Corpus>) -> Vec<String> {
    let cfg = NormConfig::default();
    let set: BTreeSet<String> = corpora
        .into_iter()
        .flat_map(|c| c.documents().iter().flat_map(|d| word_tokenize(&d.text, &cfg)))
        .collect();
    set.into_iter().collect()
}

/// Files written by [`write_toy_workspace`].
#[derive(Debug, Clone)]
pub struct ToyWorkspace {
    pub source: PathBuf,
    /// DC, DR, DCR corpus files.
    pub datasets: Vec<(String, PathBuf)>,
    pub glove: PathBuf,
    pub word2vec: PathBuf,
    pub fasttext: PathBuf,
    pub doc_vectors: PathBuf,
    pub config: PathBuf,
}

/// Write a small three-task workspace under `dir`: the source CSV, the
/// DC/DR/DCR corpora, GloVe/Word2Vec (binary)/fastText tables, document
/// vectors, and a grid config covering all six featurizers and seven
/// models. The fastText table leaves out every fifth word so that subword
/// composition is exercised.
pub fn write_toy_workspace(dir: &Path, rows: usize, repeats: usize, seed: u64) -> Result<ToyWorkspace> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let source = three_way_source(rows, seed);
    let source_path = dir.join("source.csv");
    write_source(&source_path, &source, Format::Csv)?;
    let (dc, dr, dcr) = build_tasks(&source)?;
    let mut datasets = Vec::new();
    for c in [&dc, &dr, &dcr] {
        let p = dir.join(format!("{}.csv", c.name));
        write_documents(&p, c.documents(), Format::Csv)?;
        datasets.push((c.name.clone(), p));
    }
    let vocab = vocabulary_of([&dcr]);
    let dim = 16;
    let glove = random_table(vocab.iter().map(String::as_str), dim, SourceKind::Glove, derive_seed(&[seed, 1]));
    let w2v = random_table(vocab.iter().map(String::as_str), dim, SourceKind::Word2vec, derive_seed(&[seed, 2]));
    let ft = random_table(
        vocab.iter().enumerate().filter(|(i, _)| i % 5 != 0).map(|(_, w)| w.as_str()),
        dim,
        SourceKind::Fasttext,
        derive_seed(&[seed, 3]),
    );
    let paths = (
        dir.join("glove.txt"),
        dir.join("word2vec.bin"),
        dir.join("fasttext.vec"),
        dir.join("docvectors.jsonl"),
    );
    write_glove(&glove, &paths.0)?;
    write_word2vec_binary(&w2v, &paths.1)?;
    write_fasttext_vec(&ft, &paths.2)?;

    // Document vectors: mean GloVe vector of the text plus a little noise.
    let mut dvf = DocVectorFile::new(dim);
    let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(&[seed, 4]));
    let cfg = NormConfig::default();
    for d in dcr.documents() {
        let toks = word_tokenize(&d.text, &cfg);
        let mut v = vec![0.0; dim];
        for t in &toks {
            for (a, b) in v.iter_mut().zip(glove.get(t).expect("token in table")) {
                *a += b;
            }
        }
        let n = toks.len().max(1) as f64;
        v.iter_mut().for_each(|a| *a = *a / n + 0.05 * rng.normal());
        dvf.insert(d.id.clone(), v)?;
    }
    write_doc_vectors(&dvf, &paths.3)?;

    let config = toy_config_toml(&datasets, &paths, repeats, seed);
    let config_path = dir.join("grid.toml");
    std::fs::write(&config_path, config).map_err(|e| Error::io(&config_path, e))?;
    Ok(ToyWorkspace {
        source: source_path,
        datasets,
        glove: paths.0,
        word2vec: paths.1,
        fasttext: paths.2,
        doc_vectors: paths.3,
        config: config_path,
    })
}

fn toy_config_toml(
    datasets: &[(String, PathBuf)],
    paths: &(PathBuf, PathBuf, PathBuf, PathBuf),
    repeats: usize,
    seed: u64,
) -> String {
    let file = |p: &Path| {
        p.file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let mut s = format!("repeats = {repeats}\nbase_seed = {seed}\noutput_dir = \"out\"\n\n");
    for (name, p) in datasets {
        s += &format!("[[datasets]]\nname = \"{name}\"\npath = \"{}\"\n\n", file(p));
    }
    s += "[[featurizers]]\nkind = \"bow\"\n\n";
    s += "[[featurizers]]\nkind = \"char_ngrams\"\nn_min = 2\nn_max = 4\n\n";
    s += &format!(
        "[[featurizers]]\nkind = \"word2vec\"\npath = \"{}\"\nbinary = true\n\n",
        file(&paths.1)
    );
    s += &format!("[[featurizers]]\nkind = \"glove\"\npath = \"{}\"\n\n", file(&paths.0));
    s += &format!(
        "[[featurizers]]\nkind = \"fasttext\"\npath = \"{}\"\nbucket_count = 4096\n\n",
        file(&paths.2)
    );
    s += &format!(
        "[[featurizers]]\nkind = \"doc_vectors\"\npath = \"{}\"\n\n",
        file(&paths.3)
    );
    for m in ["lrc", "rfc", "svm", "nbc", "dtc", "gbc", "mlp"] {
        s += &format!("[[models]]\nkind = \"{m}\"\n\n");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabularies_are_disjoint() {
        let a: BTreeSet<String> = class_vocabulary(0, 40, 1).into_iter().collect();
        let b: BTreeSet<String> = class_vocabulary(1, 40, 1).into_iter().collect();
        assert_eq!(a.len(), 40);
        assert!(a.is_disjoint(&b));
    }

    #[test]
    fn corpus_shape_and_determinism() {
        let c = class_corpus("t", 2, 300, 5).unwrap();
        assert_eq!(c.len(), 600);
        assert_eq!(c.labels(), ["class_0", "class_1"]);
        assert_eq!(c, class_corpus("t", 2, 300, 5).unwrap());
        let s = three_way_source(10, 3);
        assert_eq!(s.rows.len(), 10);
        assert_eq!(s, three_way_source(10, 3));
    }
}
