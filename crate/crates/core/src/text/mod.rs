//! Text normalization shared by indexing, querying and sentiment scoring.
//!
//! Words are split on whitespace, stripped of punctuation, lowercased and
//! filtered against a small stopword list. Stemming is opt-in.
//!
//! Stripped characters are the ASCII punctuation set
//! ``!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~`` plus typographic quotes, dashes and
//! the ellipsis (see [`is_stripped`]). Digits are kept.

mod porter;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use porter::stem;

/// The six determiners removed by default.
pub const DEFAULT_STOPWORDS: [&str; 6] = ["a", "that", "the", "an", "and", "those"];

const TYPOGRAPHIC: &[char] = &[
    '\u{2018}', '\u{2019}', '\u{201A}', '\u{201B}', // single quotes
    '\u{201C}', '\u{201D}', '\u{201E}', '\u{201F}', // double quotes
    '\u{2039}', '\u{203A}', '\u{00AB}', '\u{00BB}', // guillemets
    '\u{2010}', '\u{2011}', '\u{2012}', '\u{2013}', '\u{2014}', '\u{2015}', // dashes
    '\u{2026}', // ellipsis
    '\u{2032}', '\u{2033}', // primes
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub stopwords: BTreeSet<String>,
    pub stemming: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            stemming: false,
        }
    }
}

impl PipelineConfig {
    pub fn with_stemming(mut self, stemming: bool) -> Self {
        self.stemming = stemming;
        self
    }

    /// No stopword removal and no stemming; used on the sentiment path so
    /// that negators and boosters stay adjacent to the words they modify.
    pub fn surface() -> Self {
        PipelineConfig {
            stopwords: BTreeSet::new(),
            stemming: false,
        }
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }
}

/// Splits on runs of whitespace, dropping empty pieces.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

pub fn is_stripped(c: char) -> bool {
    c.is_ascii_punctuation() || TYPOGRAPHIC.contains(&c)
}

/// Normalizes one word; `None` when nothing is left or the word is a stopword.
pub fn normalize_word(word: &str, config: &PipelineConfig) -> Option<String> {
    // Per-char lowercasing: context-free, so re-normalizing is a no-op.
    // Characters that stay uppercase after lowercasing (e.g. mathematical
    // capitals) have no lowercase form and are dropped.
    let cleaned: String = word
        .chars()
        .filter(|&c| !is_stripped(c))
        .flat_map(char::to_lowercase)
        .filter(|c| !c.is_uppercase())
        .collect();
    if cleaned.is_empty() || config.is_stopword(&cleaned) {
        return None;
    }
    if !config.stemming {
        return Some(cleaned);
    }
    let stemmed = stem(&cleaned);
    (!config.is_stopword(&stemmed)).then_some(stemmed)
}

pub fn normalize<S: AsRef<str>>(words: &[S], config: &PipelineConfig) -> Vec<String> {
    words
        .iter()
        .filter_map(|w| normalize_word(w.as_ref(), config))
        .collect()
}

/// `tokenize` followed by `normalize`.
pub fn analyze(text: &str, config: &PipelineConfig) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|w| normalize_word(w, config))
        .collect()
}
