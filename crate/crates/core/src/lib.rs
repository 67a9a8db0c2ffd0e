//! Category-classified full-text search over a news corpus.
//!
//! The crate covers the whole offline and query-time path: staging crawled
//! pages as JSONL ([`crawler`]), the document store ([`corpus`]), text
//! normalization ([`text`]), the persisted inverted index ([`index`]), BM25 and
//! TF-IDF scoring ([`ranking`]), lexicon sentiment scoring ([`sentiment`]),
//! related-article similarity ([`similarity`]), the end-to-end search
//! orchestration ([`search`]) and precision/recall evaluation ([`eval`]).

pub mod corpus;
pub mod crawler;
pub mod eval;
pub mod index;
pub mod ranking;
pub mod search;
pub mod sentiment;
pub mod similarity;
pub mod text;

pub use corpus::{Corpus, CorpusError, DocId, Document};
pub use index::{Field, FieldPolicy, Index, IndexError, IndexStats, Posting, PostingList};
pub use ranking::{Ranker, RankingError, RankingParams, ScoredDoc};
pub use search::{Query, SearchEngine, SearchError, SearchResponse, SearchResult};
pub use sentiment::{Lexicon, LexiconError, SentimentClass, SentimentScore};
pub use text::PipelineConfig;
