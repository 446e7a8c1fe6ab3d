//! Normalization, word tokens, and character n-grams.
//!
//! cargo run --example tokenize_text -- "Some  Text, with Accénts"

use oneshot::tokenize::{char_ngrams, normalize, word_tokenize, NormConfig};

fn main() -> oneshot::Result<()> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "The  patient's Fever résolved   after 2 days.".into());
    let cfg = NormConfig::default();
    let stripped = NormConfig {
        strip_accents: true,
        ..cfg
    };
    println!("normalized:      {:?}", normalize(&text, &cfg));
    println!("accents removed: {:?}", normalize(&text, &stripped));
    println!("words:           {:?}", word_tokenize(&text, &cfg));
    println!("char 2..3:       {:?}", char_ngrams("fever", 2, 3, &cfg)?);
    Ok(())
}
