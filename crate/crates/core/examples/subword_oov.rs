//! fastText-style vectors for out-of-vocabulary words, composed from
//! hashed character n-grams.
//!
//! cargo run --example subword_oov -- feverish

use oneshot::embedio::{fnv1a_32, EmbeddingTable, SourceKind, SubwordModel};

fn main() -> oneshot::Result<()> {
    let word = std::env::args().nth(1).unwrap_or_else(|| "feverish".into());
    let mut table = EmbeddingTable::new(4, SourceKind::Fasttext);
    table.insert("fever", &[1.0, 0.0, 0.0, 0.0])?;
    let model = SubwordModel::seeded(table, 1000, 3, 6, 7)?;
    println!("fnv1a_32(\"<fe\") = {}", fnv1a_32("<fe".as_bytes()));
    for g in model.subwords(&word) {
        println!("  {g:<10} bucket {}", model.bucket_of(&g));
    }
    match model.subword_vector(&word) {
        Some(v) => println!("{word}: {v:.4?}"),
        None => println!("{word}: no subwords"),
    }
    Ok(())
}
