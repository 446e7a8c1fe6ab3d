//! Write one table in every supported word-vector format, read each back,
//! and summarize it.
//!
//! cargo run --example embeddings_io

use oneshot::embedio::{
    parse_fasttext_vec, parse_glove, parse_word2vec, summarize, write_fasttext_vec, write_glove,
    write_word2vec_binary, write_word2vec_text, EmbeddingTable, SourceKind,
};

fn main() -> oneshot::Result<()> {
    let dir = std::env::temp_dir().join("oneshot-embeddings-io");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let mut table = EmbeddingTable::new(3, SourceKind::Glove);
    table.insert("fever", &[0.5, -0.25, 1.0])?;
    table.insert("cough", &[0.0, 0.75, -0.5])?;
    table.insert("rest", &[1.0, 1.0, 0.0])?;

    let glove = dir.join("v.glove.txt");
    let w2v = dir.join("v.w2v.txt");
    let bin = dir.join("v.w2v.bin");
    let ft = dir.join("v.vec");
    write_glove(&table, &glove)?;
    write_word2vec_text(&table, &w2v)?;
    write_word2vec_binary(&table, &bin)?;
    write_fasttext_vec(&table, &ft)?;

    for (name, t) in [
        ("glove", parse_glove(&glove)?),
        ("word2vec text", parse_word2vec(&w2v, false)?),
        ("word2vec binary", parse_word2vec(&bin, true)?),
        ("fasttext .vec", parse_fasttext_vec(&ft)?),
    ] {
        let s = summarize(&t);
        println!(
            "{name:<16} {} x {}  mean norm {:.4}  fever={:?}",
            s.entries,
            s.dim,
            s.mean_norm,
            t.get("fever")
        );
    }
    Ok(())
}
