//! Okapi BM25 scoring with a plain TF-IDF baseline.
//!
//! BM25(d, q) = Σ_{distinct t ∈ q} idf(t) · tf·(k1+1) / (tf + k1·(1 − b + b·|d|/avgdl))
//! with idf(t) = ln((N − df + 0.5)/(df + 0.5) + 1), which never goes negative.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::DocId;
use crate::index::Index;

#[derive(Debug, Error, PartialEq)]
pub enum RankingError {
    #[error("document {0} is not in the index")]
    UnknownDoc(DocId),
    #[error("invalid ranking parameters: {0}")]
    InvalidParams(String),
    #[error("unknown ranker {0:?} (expected bm25 or tfidf)")]
    UnknownRanker(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingParams {
    pub k1: f64,
    pub b: f64,
}

impl Default for RankingParams {
    fn default() -> Self {
        RankingParams { k1: 1.2, b: 0.75 }
    }
}

impl RankingParams {
    pub fn new(k1: f64, b: f64) -> Result<Self, RankingError> {
        let params = RankingParams { k1, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), RankingError> {
        if !(self.k1.is_finite() && self.k1 > 0.0) {
            return Err(RankingError::InvalidParams(format!(
                "k1 must be > 0, got {}",
                self.k1
            )));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(RankingError::InvalidParams(format!(
                "b must be in [0, 1], got {}",
                self.b
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ranker {
    #[default]
    Bm25,
    TfIdf,
}

impl FromStr for Ranker {
    type Err = RankingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bm25" => Ok(Ranker::Bm25),
            "tfidf" => Ok(Ranker::TfIdf),
            _ => Err(RankingError::UnknownRanker(s.to_owned())),
        }
    }
}

impl fmt::Display for Ranker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ranker::Bm25 => "bm25",
            Ranker::TfIdf => "tfidf",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc_id: DocId,
    pub score: f64,
}

pub fn bm25_idf(n_docs: usize, df: usize) -> f64 {
    let (n, df) = (n_docs as f64, df as f64);
    ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
}

/// Saturated, length-normalized term weight for a single posting.
pub fn bm25_term_weight(tf: u32, doc_len: u32, avg_doc_len: f64, params: RankingParams) -> f64 {
    let tf = f64::from(tf);
    let norm = 1.0 - params.b + params.b * f64::from(doc_len) / avg_doc_len;
    tf * (params.k1 + 1.0) / (tf + params.k1 * norm)
}

fn distinct(query_terms: &[String]) -> BTreeSet<&str> {
    query_terms.iter().map(String::as_str).collect()
}

pub fn bm25_score(
    query_terms: &[String],
    doc_id: DocId,
    index: &Index,
    params: RankingParams,
) -> Result<f64, RankingError> {
    let doc_len = index
        .doc_len(doc_id)
        .ok_or(RankingError::UnknownDoc(doc_id))?;
    let stats = index.stats();
    let mut score = 0.0;
    for term in distinct(query_terms) {
        let Some(list) = index.lookup(term) else {
            continue;
        };
        let tf = list.tf(doc_id);
        if tf == 0 {
            continue;
        }
        score += bm25_idf(stats.n_docs, list.df)
            * bm25_term_weight(tf, doc_len, stats.avg_doc_len, params);
    }
    Ok(score)
}

/// Σ tf · ln(N/df) over distinct query terms.
pub fn tfidf_score(
    query_terms: &[String],
    doc_id: DocId,
    index: &Index,
) -> Result<f64, RankingError> {
    if !index.contains_doc(doc_id) {
        return Err(RankingError::UnknownDoc(doc_id));
    }
    let n = index.stats().n_docs as f64;
    let mut score = 0.0;
    for term in distinct(query_terms) {
        let Some(list) = index.lookup(term) else {
            continue;
        };
        let tf = list.tf(doc_id);
        if tf > 0 {
            score += f64::from(tf) * (n / list.df as f64).ln();
        }
    }
    Ok(score)
}

pub fn score(
    ranker: Ranker,
    query_terms: &[String],
    doc_id: DocId,
    index: &Index,
    params: RankingParams,
) -> Result<f64, RankingError> {
    match ranker {
        Ranker::Bm25 => bm25_score(query_terms, doc_id, index, params),
        Ranker::TfIdf => tfidf_score(query_terms, doc_id, index),
    }
}

/// Descending score, ties broken by ascending doc id.
pub fn compare_scored(a: &ScoredDoc, b: &ScoredDoc) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.doc_id.cmp(&b.doc_id))
}

/// Scores and sorts every candidate.
pub fn rank(
    candidates: impl IntoIterator<Item = DocId>,
    query_terms: &[String],
    index: &Index,
    ranker: Ranker,
    params: RankingParams,
) -> Result<Vec<ScoredDoc>, RankingError> {
    let mut scored = candidates
        .into_iter()
        .map(|doc_id| {
            score(ranker, query_terms, doc_id, index, params)
                .map(|score| ScoredDoc { doc_id, score })
        })
        .collect::<Result<Vec<_>, _>>()?;
    scored.sort_by(compare_scored);
    Ok(scored)
}
