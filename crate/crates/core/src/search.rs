//! End-to-end classified search over one immutable snapshot.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, DocId};
use crate::index::Index;
use crate::ranking::{self, Ranker, RankingError, RankingParams};
use crate::sentiment::{self, Lexicon, SentimentScore};
use crate::similarity::{Related, SimilarityModel};

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("query has no searchable terms")]
    EmptyQuery,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Ranking(#[from] RankingError),
    #[error("index document {0} is missing from the corpus")]
    SnapshotMismatch(DocId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub text: String,
    pub category: Option<String>,
    pub limit: usize,
    pub ranker: Ranker,
    pub params: RankingParams,
}

impl Query {
    pub fn new(text: impl Into<String>) -> Query {
        Query {
            text: text.into(),
            category: None,
            limit: 10,
            ranker: Ranker::Bm25,
            params: RankingParams::default(),
        }
    }

    pub fn category(mut self, category: impl Into<String>) -> Query {
        self.category = Some(category.into());
        self
    }

    pub fn limit(mut self, limit: usize) -> Query {
        self.limit = limit;
        self
    }

    pub fn ranker(mut self, ranker: Ranker) -> Query {
        self.ranker = ranker;
        self
    }

    pub fn params(mut self, params: RankingParams) -> Query {
        self.params = params;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub id: DocId,
    pub title: String,
    pub url: String,
    pub label: String,
    pub dt: String,
    pub score: f64,
    pub sentiment: SentimentScore,
    pub matched_terms: Vec<String>,
    pub fuzzy_substitutions: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub results: Vec<SearchResult>,
    /// Candidates after category filtering, before truncation.
    pub total_candidates: usize,
    /// Set when a category was requested that no document carries.
    pub category_unknown: bool,
}

/// Query terms after exact lookup and fuzzy fallback.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResolvedTerms {
    /// Distinct index terms, in first-seen query order.
    pub terms: Vec<String>,
    pub substitutions: BTreeMap<String, String>,
}

/// Index, corpus and lexicon loaded from the same build.
#[derive(Debug)]
pub struct SearchEngine {
    corpus: Corpus,
    index: Index,
    lexicon: Lexicon,
    similarity: SimilarityModel,
}

impl SearchEngine {
    pub fn new(
        corpus: Corpus,
        index: Index,
        lexicon: Lexicon,
    ) -> Result<SearchEngine, SearchError> {
        if let Some(&id) = index.doc_lens().keys().find(|id| !corpus.contains(**id)) {
            return Err(SearchError::SnapshotMismatch(id));
        }
        let similarity = SimilarityModel::new(&index);
        Ok(SearchEngine {
            corpus,
            index,
            lexicon,
            similarity,
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Normalizes the query and resolves each term, substituting the best
    /// fuzzy candidate for terms missing from the vocabulary. Terms with no
    /// candidate are dropped.
    pub fn resolve_terms(&self, text: &str) -> Result<ResolvedTerms, SearchError> {
        let tokens = self.index.analyze(text);
        if tokens.is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        let mut resolved = ResolvedTerms::default();
        let mut seen = BTreeSet::new();
        for token in tokens {
            let term = if self.index.lookup(&token).is_some() {
                token
            } else {
                let candidate = self
                    .index
                    .fuzzy_terms(&token, 1)
                    .ok()
                    .and_then(|mut c| c.pop());
                match candidate {
                    Some(c) => {
                        resolved.substitutions.insert(token, c.clone());
                        c
                    }
                    None => continue,
                }
            };
            if seen.insert(term.clone()) {
                resolved.terms.push(term);
            }
        }
        Ok(resolved)
    }

    /// Doc ids matching any resolved term, optionally restricted to a label.
    /// The flag is true when the category is unknown.
    pub fn candidates(&self, terms: &[String], category: Option<&str>) -> (BTreeSet<DocId>, bool) {
        let mut ids: BTreeSet<DocId> = terms
            .iter()
            .filter_map(|t| self.index.lookup(t))
            .flat_map(|list| list.doc_ids())
            .collect();
        let mut unknown = false;
        if let Some(label) = category {
            if self.corpus.has_label(label) {
                let allowed = self.corpus.docs_by_label(label);
                ids.retain(|id| allowed.contains(id));
            } else {
                ids.clear();
                unknown = true;
            }
        }
        (ids, unknown)
    }

    pub fn search(&self, query: &Query) -> Result<SearchResponse, SearchError> {
        if query.limit == 0 {
            return Err(SearchError::InvalidQuery("limit must be at least 1".into()));
        }
        query.params.validate()?;
        let resolved = self.resolve_terms(&query.text)?;
        let (candidates, category_unknown) =
            self.candidates(&resolved.terms, query.category.as_deref());
        let total_candidates = candidates.len();
        let mut ranked = ranking::rank(
            candidates,
            &resolved.terms,
            &self.index,
            query.ranker,
            query.params,
        )?;
        ranked.truncate(query.limit);

        let results = ranked
            .into_iter()
            .map(|scored| {
                let doc = self
                    .corpus
                    .get(scored.doc_id)
                    .ok_or(SearchError::SnapshotMismatch(scored.doc_id))?;
                let matched_terms: Vec<String> = resolved
                    .terms
                    .iter()
                    .filter(|t| self.index.lookup(t).is_some_and(|l| l.tf(doc.id) > 0))
                    .cloned()
                    .collect();
                let fuzzy_substitutions = resolved
                    .substitutions
                    .iter()
                    .filter(|(_, used)| matched_terms.contains(used))
                    .map(|(raw, used)| (raw.clone(), used.clone()))
                    .collect();
                Ok(SearchResult {
                    id: doc.id,
                    title: doc.title.clone(),
                    url: doc.url.clone(),
                    label: doc.label.clone(),
                    dt: doc.dt.format("%Y-%m-%d").to_string(),
                    score: scored.score,
                    sentiment: sentiment::score_document(doc, &self.lexicon),
                    matched_terms,
                    fuzzy_substitutions,
                })
            })
            .collect::<Result<Vec<_>, SearchError>>()?;

        Ok(SearchResponse {
            results,
            total_candidates,
            category_unknown,
        })
    }

    pub fn related(&self, doc_id: DocId, k: usize) -> Result<Vec<Related>, RankingError> {
        self.similarity.related(doc_id, k)
    }
}
