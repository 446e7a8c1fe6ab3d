//! Word and character TF-IDF on a tiny corpus.
//!
//! cargo run --example tfidf

use oneshot::corpus::Document;
use oneshot::featurize::{fit_tfidf, transform_tfidf, Analyzer};
use oneshot::tokenize::NormConfig;

fn doc(id: &str, text: &str) -> Document {
    Document {
        id: id.into(),
        text: text.into(),
        label: "x".into(),
    }
}

fn main() -> oneshot::Result<()> {
    let docs = [
        doc("a", "take the tablets with water"),
        doc("b", "the rash should fade"),
        doc("c", "drink water and rest"),
    ];
    let cfg = NormConfig::default();
    let words = fit_tfidf(&docs, Analyzer::Word, &cfg)?;
    println!("{} word features", words.n_features());
    for t in ["the", "water", "rash"] {
        println!("  idf({t}) = {:.4}", words.idf_of(t).unwrap_or(f64::NAN));
    }
    let m = transform_tfidf(&words, &docs)?;
    for (id, row) in m.row_ids().iter().zip(m.rows()) {
        println!("  {id}: l2 norm {:.4}", row.norm());
    }
    let chars = fit_tfidf(&docs, Analyzer::Char { n_min: 2, n_max: 4 }, &cfg)?;
    println!("{} char 2..4 features", chars.n_features());
    let unseen = transform_tfidf(&chars, &[doc("q", "waterproof tablets")])?;
    println!("  unseen doc: norm {:.4}", unseen.row(0).norm());
    Ok(())
}
