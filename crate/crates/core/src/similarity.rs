//! Related-article lookup by cosine similarity of TF-IDF document vectors.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::DocId;
use crate::index::Index;
use crate::ranking::RankingError;

/// Sparse `term -> tf·ln(N/df)` vector. Zero weights are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DocVector {
    pub doc_id: DocId,
    pub weights: BTreeMap<String, f64>,
}

impl DocVector {
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn weight(tf: u32, n_docs: usize, df: usize) -> f64 {
    f64::from(tf) * (n_docs as f64 / df as f64).ln()
}

/// Vector for one document; terms present in every document are omitted.
pub fn doc_vector(doc_id: DocId, index: &Index) -> Result<DocVector, RankingError> {
    if !index.contains_doc(doc_id) {
        return Err(RankingError::UnknownDoc(doc_id));
    }
    let n = index.stats().n_docs;
    let weights = index
        .posting_lists()
        .filter(|list| list.df < n)
        .filter_map(|list| {
            let tf = list.tf(doc_id);
            (tf > 0).then(|| (list.term.clone(), weight(tf, n, list.df)))
        })
        .collect();
    Ok(DocVector { doc_id, weights })
}

/// Cosine similarity; 0 when either vector is empty.
///
/// The dot product and both norms are summed in term order, so the result
/// is symmetric and a vector compared with itself (or an identical copy)
/// yields exactly 1.
pub fn cosine(a: &DocVector, b: &DocVector) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let dot: f64 = a
        .weights
        .iter()
        .filter_map(|(term, wa)| b.weights.get(term).map(|wb| wa * wb))
        .sum();
    let norm_sq = |v: &DocVector| v.weights.values().map(|w| w * w).sum::<f64>();
    let sim = dot / (norm_sq(a) * norm_sq(b)).sqrt();
    sim.clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Related {
    pub doc_id: DocId,
    pub similarity: f64,
}

/// Precomputed vectors for every indexed document.
#[derive(Clone, Debug, Default)]
pub struct SimilarityModel {
    vectors: BTreeMap<DocId, DocVector>,
}

impl SimilarityModel {
    /// Builds all vectors in one pass over the postings.
    pub fn new(index: &Index) -> SimilarityModel {
        let n = index.stats().n_docs;
        let mut vectors: BTreeMap<DocId, DocVector> = index
            .doc_lens()
            .keys()
            .map(|&doc_id| {
                (
                    doc_id,
                    DocVector {
                        doc_id,
                        weights: BTreeMap::new(),
                    },
                )
            })
            .collect();
        for list in index.posting_lists().filter(|l| l.df < n) {
            for p in &list.postings {
                if let Some(v) = vectors.get_mut(&p.doc_id) {
                    v.weights
                        .insert(list.term.clone(), weight(p.tf, n, list.df));
                }
            }
        }
        SimilarityModel { vectors }
    }

    pub fn vector(&self, doc_id: DocId) -> Option<&DocVector> {
        self.vectors.get(&doc_id)
    }

    /// The `k` most similar other documents, most similar first, ties by
    /// ascending id.
    pub fn related(&self, doc_id: DocId, k: usize) -> Result<Vec<Related>, RankingError> {
        let target = self
            .vector(doc_id)
            .ok_or(RankingError::UnknownDoc(doc_id))?;
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut all: Vec<Related> = self
            .vectors
            .values()
            .filter(|v| v.doc_id != doc_id)
            .map(|v| Related {
                doc_id: v.doc_id,
                similarity: cosine(target, v),
            })
            .collect();
        all.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        all.truncate(k);
        Ok(all)
    }
}

pub fn related(doc_id: DocId, k: usize, index: &Index) -> Result<Vec<Related>, RankingError> {
    SimilarityModel::new(index).related(doc_id, k)
}
