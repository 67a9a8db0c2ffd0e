//! Lexicon-based sentiment strength scoring.
//!
//! Every text gets a positive strength in 1..=5 and a negative strength in
//! -5..=-1, where 1 and -1 mean "nothing of that sign". Polarity is the mean
//! of positive, neutral (always 0) and negative.
//!
//! Word rules, applied per lexicon hit:
//! * a booster directly before the word adds its value to the magnitude;
//! * a negator among the two preceding tokens flips the sign and halves the
//!   magnitude, rounding up (so +3 becomes -2);
//! * magnitudes are clamped to 1..=5.
//!
//! A sentence takes the strongest positive and negative word; a document
//! takes the strongest sentence values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, DocId, Document};
use crate::text::{self, PipelineConfig};

const STARTER_LEXICON: &str = include_str!("../data/starter_lexicon.tsv");

const NEGATION_WINDOW: usize = 2;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: strength {value} for {token:?} out of range ({allowed})")]
    Range {
        line: usize,
        token: String,
        value: i64,
        allowed: &'static str,
    },
    #[error("line {line}: {token:?} already defined")]
    Duplicate { line: usize, token: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lexicon {
    term_strengths: BTreeMap<String, i32>,
    boosters: BTreeMap<String, i32>,
    negators: BTreeSet<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Terms,
    Boosters,
    Negators,
}

impl Lexicon {
    /// The small lexicon bundled with the crate.
    pub fn starter() -> Lexicon {
        Lexicon::parse(STARTER_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.to_owned(),
            source,
        })?;
        Lexicon::parse(&raw)
    }

    /// Parses the TSV format: `token<TAB>strength` lines, then optional
    /// `#boosters` (`token<TAB>adjustment`) and `#negators` (`token`)
    /// sections. Other lines starting with `#` are comments.
    pub fn parse(input: &str) -> Result<Lexicon, LexiconError> {
        let mut lexicon = Lexicon::default();
        let mut section = Section::Terms;
        for (idx, raw_line) in input.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(header) = trimmed.strip_prefix('#') {
                match header.trim().to_ascii_lowercase().as_str() {
                    "terms" => section = Section::Terms,
                    "boosters" => section = Section::Boosters,
                    "negators" => section = Section::Negators,
                    _ => {}
                }
                continue;
            }
            let mut cols = trimmed.split('\t').map(str::trim);
            let token = cols.next().unwrap_or_default().to_lowercase();
            if token.chars().any(char::is_whitespace) {
                return Err(LexiconError::Parse {
                    line,
                    message: format!("expected token<TAB>value, got {trimmed:?}"),
                });
            }
            if lexicon.contains(&token) {
                return Err(LexiconError::Duplicate { line, token });
            }
            let value = cols.next();
            if cols.next().is_some() {
                return Err(LexiconError::Parse {
                    line,
                    message: "too many columns".into(),
                });
            }
            match section {
                Section::Negators => {
                    if value.is_some() {
                        return Err(LexiconError::Parse {
                            line,
                            message: format!("negator {token:?} takes no value"),
                        });
                    }
                    lexicon.negators.insert(token);
                }
                Section::Terms | Section::Boosters => {
                    let value = parse_value(line, &token, value)?;
                    let (ok, allowed) = if section == Section::Terms {
                        ((1..=5).contains(&value.abs()), "-5..-1 or 1..5")
                    } else {
                        (matches!(value, -1 | 1 | 2), "-1, 1 or 2")
                    };
                    if !ok {
                        return Err(LexiconError::Range {
                            line,
                            token,
                            value,
                            allowed,
                        });
                    }
                    let table = if section == Section::Terms {
                        &mut lexicon.term_strengths
                    } else {
                        &mut lexicon.boosters
                    };
                    table.insert(token, value as i32);
                }
            }
        }
        Ok(lexicon)
    }

    fn contains(&self, token: &str) -> bool {
        self.term_strengths.contains_key(token)
            || self.boosters.contains_key(token)
            || self.negators.contains(token)
    }

    pub fn strength(&self, token: &str) -> Option<i32> {
        self.term_strengths.get(token).copied()
    }

    pub fn booster(&self, token: &str) -> Option<i32> {
        self.boosters.get(token).copied()
    }

    pub fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token)
    }

    pub fn term_strengths(&self) -> &BTreeMap<String, i32> {
        &self.term_strengths
    }

    pub fn boosters(&self) -> &BTreeMap<String, i32> {
        &self.boosters
    }

    pub fn negators(&self) -> &BTreeSet<String> {
        &self.negators
    }

    pub fn len(&self) -> usize {
        self.term_strengths.len() + self.boosters.len() + self.negators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn parse_value(line: usize, token: &str, value: Option<&str>) -> Result<i64, LexiconError> {
    let value = value.ok_or_else(|| LexiconError::Parse {
        line,
        message: format!("missing value for {token:?}"),
    })?;
    value.parse().map_err(|_| LexiconError::Parse {
        line,
        message: format!("{value:?} is not an integer"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentClass {
    Negative,
    Neutral,
    Positive,
}

impl SentimentClass {
    pub const ALL: [SentimentClass; 3] = [
        SentimentClass::Negative,
        SentimentClass::Neutral,
        SentimentClass::Positive,
    ];

    pub fn from_polarity(polarity: f64) -> SentimentClass {
        if polarity > 0.0 {
            SentimentClass::Positive
        } else if polarity < 0.0 {
            SentimentClass::Negative
        } else {
            SentimentClass::Neutral
        }
    }

    pub fn parse(s: &str) -> Option<SentimentClass> {
        match s.trim().to_ascii_lowercase().as_str() {
            "negative" => Some(SentimentClass::Negative),
            "neutral" => Some(SentimentClass::Neutral),
            "positive" => Some(SentimentClass::Positive),
            _ => None,
        }
    }
}

impl fmt::Display for SentimentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SentimentClass::Negative => "negative",
            SentimentClass::Neutral => "neutral",
            SentimentClass::Positive => "positive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub positive: i32,
    pub negative: i32,
    pub neutral: i32,
    pub polarity: f64,
    pub class: SentimentClass,
}

impl SentimentScore {
    /// Builds a score from clamped components; neutral is fixed at 0.
    pub fn from_components(positive: i32, negative: i32) -> SentimentScore {
        let positive = positive.clamp(1, 5);
        let negative = negative.clamp(-5, -1);
        let neutral = 0;
        let polarity = polarity(positive, neutral, negative);
        SentimentScore {
            positive,
            negative,
            neutral,
            polarity,
            class: SentimentClass::from_polarity(polarity),
        }
    }
}

/// (positive + neutral + negative) / 3
pub fn polarity(positive: i32, neutral: i32, negative: i32) -> f64 {
    f64::from(positive + neutral + negative) / 3.0
}

/// Effective strength of the lexicon word at `i`, if it is one.
fn effective_strength(tokens: &[String], i: usize, lexicon: &Lexicon) -> Option<i32> {
    let base = lexicon.strength(&tokens[i])?;
    let mut magnitude = base.abs();
    if let Some(adj) = i.checked_sub(1).and_then(|p| lexicon.booster(&tokens[p])) {
        magnitude = (magnitude + adj).clamp(1, 5);
    }
    let negated = tokens[i.saturating_sub(NEGATION_WINDOW)..i]
        .iter()
        .any(|t| lexicon.is_negator(t));
    if negated {
        // halve toward 1, rounding up
        Some(-base.signum() * ((magnitude + 1) / 2))
    } else {
        Some(base.signum() * magnitude)
    }
}

/// (positive, negative) strengths of one tokenized sentence.
pub fn score_sentence(tokens: &[String], lexicon: &Lexicon) -> (i32, i32) {
    let mut pos = 1;
    let mut neg = -1;
    for i in 0..tokens.len() {
        match effective_strength(tokens, i, lexicon) {
            Some(s) if s > 0 => pos = pos.max(s),
            Some(s) if s < 0 => neg = neg.min(s),
            _ => {}
        }
    }
    (pos.min(5), neg.max(-5))
}

/// Splits at `.`, `!` and `?`, dropping the terminators.
pub fn sentences(text: &str) -> impl Iterator<Item = &str> {
    text.split(['.', '!', '?']).filter(|s| !s.trim().is_empty())
}

/// Scores free text (one or more sentences).
pub fn score_text(text: &str, lexicon: &Lexicon) -> (i32, i32) {
    let surface = PipelineConfig::surface();
    sentences(text)
        .map(|s| score_sentence(&text::analyze(s, &surface), lexicon))
        .fold((1, -1), |(p, n), (sp, sn)| (p.max(sp), n.min(sn)))
}

/// Scores a document over its title and article; the title counts as its
/// own sentence.
pub fn score_document(doc: &Document, lexicon: &Lexicon) -> SentimentScore {
    let (tp, tn) = score_text(&doc.title, lexicon);
    let (ap, an) = score_text(&doc.article, lexicon);
    SentimentScore::from_components(tp.max(ap), tn.min(an))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub positive: usize,
    pub neutral: usize,
    pub negative: usize,
}

impl ClassCounts {
    pub fn add(&mut self, class: SentimentClass) {
        *self.get_mut(class) += 1;
    }

    pub fn get(&self, class: SentimentClass) -> usize {
        match class {
            SentimentClass::Positive => self.positive,
            SentimentClass::Neutral => self.neutral,
            SentimentClass::Negative => self.negative,
        }
    }

    fn get_mut(&mut self, class: SentimentClass) -> &mut usize {
        match class {
            SentimentClass::Positive => &mut self.positive,
            SentimentClass::Neutral => &mut self.neutral,
            SentimentClass::Negative => &mut self.negative,
        }
    }

    pub fn total(&self) -> usize {
        self.positive + self.neutral + self.negative
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarityReport {
    pub n_docs: usize,
    pub counts: ClassCounts,
    /// Absent for an empty corpus.
    pub mean_polarity: Option<f64>,
    pub median_polarity: Option<f64>,
}

pub fn corpus_polarity_report(corpus: &Corpus, lexicon: &Lexicon) -> PolarityReport {
    let scores: Vec<SentimentScore> = corpus
        .documents()
        .iter()
        .map(|d| score_document(d, lexicon))
        .collect();
    polarity_report(&scores)
}

pub fn polarity_report(scores: &[SentimentScore]) -> PolarityReport {
    let mut counts = ClassCounts::default();
    for s in scores {
        counts.add(s.class);
    }
    let mut values: Vec<f64> = scores.iter().map(|s| s.polarity).collect();
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let mean_polarity = (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
    let median_polarity = (n > 0).then(|| {
        if n % 2 == 1 {
            values[n / 2]
        } else {
            (values[n / 2 - 1] + values[n / 2]) / 2.0
        }
    });
    PolarityReport {
        n_docs: n,
        counts,
        mean_polarity,
        median_polarity,
    }
}

/// Per-document scores keyed by id.
pub fn score_corpus(corpus: &Corpus, lexicon: &Lexicon) -> BTreeMap<DocId, SentimentScore> {
    corpus
        .documents()
        .iter()
        .map(|d| (d.id, score_document(d, lexicon)))
        .collect()
}
