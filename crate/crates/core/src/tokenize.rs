//! Text normalization, word tokens, and character n-grams.
//!
//! Tokenization works on Unicode scalar values. There is no stemming and no
//! stop-word list.

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Largest supported character n-gram length.
pub const MAX_NGRAM: usize = 8;

/// Normalization switches applied before tokenizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormConfig {
    pub lowercase: bool,
    pub strip_accents: bool,
    pub collapse_whitespace: bool,
    /// Shortest word token kept by [`word_tokenize`].
    pub min_token_chars: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            lowercase: true,
            strip_accents: false,
            collapse_whitespace: true,
            min_token_chars: 2,
        }
    }
}

/// Apply `cfg` to `text`. Lowercasing runs before accent stripping so the
/// result is a fixed point of `normalize`.
pub fn normalize(text: &str, cfg: &NormConfig) -> String {
    let mut out: String = if cfg.lowercase {
        text.to_lowercase()
    } else {
        text.to_owned()
    };
    if cfg.strip_accents {
        out = out.nfd().filter(|c| !is_combining_mark(*c)).collect();
    }
    if cfg.collapse_whitespace {
        out = collapse_whitespace(&out);
    }
    out
}

/// Collapse every whitespace run to one ASCII space and trim both ends.
pub fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Maximal runs of alphanumeric characters, in order, keeping runs of at
/// least `cfg.min_token_chars` characters (two by default).
pub fn word_tokenize(text: &str, cfg: &NormConfig) -> Vec<String> {
    let norm = normalize(text, cfg);
    let min = cfg.min_token_chars.max(1);
    norm.split(|c: char| !c.is_alphanumeric())
        .filter(|run| run.chars().nth(min - 1).is_some())
        .map(str::to_owned)
        .collect()
}

pub fn check_ngram_range(n_min: usize, n_max: usize) -> Result<()> {
    if n_min < 1 || n_min > n_max || n_max > MAX_NGRAM {
        return Err(Error::NgramRange { n_min, n_max });
    }
    Ok(())
}

/// Every contiguous character window with length in `n_min..=n_max`.
///
/// Windows are taken over the normalized text with whitespace always
/// collapsed to single spaces, shorter lengths first. Duplicates are kept.
pub fn char_ngrams(text: &str, n_min: usize, n_max: usize, cfg: &NormConfig) -> Result<Vec<String>> {
    check_ngram_range(n_min, n_max)?;
    let cfg = NormConfig {
        collapse_whitespace: true,
        ..*cfg
    };
    let norm = normalize(text, &cfg);
    Ok(windows(&norm, n_min, n_max))
}

/// Character windows of `text` as-is (no normalization).
pub(crate) fn windows(text: &str, n_min: usize, n_max: usize) -> Vec<String> {
    // Byte offset of every char boundary, including the end.
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n_chars = bounds.len() - 1;
    let mut out = Vec::new();
    for n in n_min..=n_max {
        if n > n_chars {
            break;
        }
        for start in 0..=(n_chars - n) {
            out.push(text[bounds[start]..bounds[start + n]].to_owned());
        }
    }
    out
}
