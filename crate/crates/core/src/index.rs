//! Inverted index: term -> posting list of `(doc_id, tf, doc_len)` triples.
//!
//! The on-disk form is a directory with two files:
//!
//! * `stats.json` holds the format version, collection statistics, the
//!   pipeline configuration and indexed fields, and every document length.
//! * `postings.jsonl` starts with a header line carrying the format version,
//!   followed by one posting list per line, e.g.
//!   `{"term":"sarah","df":7,"docs":[[11,1,10],[12,1,9]]}`.
//!
//! The pipeline configuration is stored so queries are normalized the same
//! way as the documents were.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, DocId, Document};
use crate::text::{self, PipelineConfig};

pub const FORMAT_VERSION: u32 = 1;
pub const STATS_FILE: &str = "stats.json";
pub const POSTINGS_FILE: &str = "postings.jsonl";

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: unsupported index format version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { path: PathBuf, found: u32 },
    #[error("corrupt index: {0}")]
    Corrupt(String),
    #[error("fuzzy match needs a non-empty term")]
    EmptyTerm,
    #[error("unknown field {0:?} (expected title or article)")]
    UnknownField(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(DocId, u32, u32)", into = "(DocId, u32, u32)")]
pub struct Posting {
    pub doc_id: DocId,
    /// Occurrences of the term in the document's indexed text.
    pub tf: u32,
    /// Token count of the document's indexed text.
    pub doc_len: u32,
}

impl From<(DocId, u32, u32)> for Posting {
    fn from((doc_id, tf, doc_len): (DocId, u32, u32)) -> Self {
        Posting {
            doc_id,
            tf,
            doc_len,
        }
    }
}

impl From<Posting> for (DocId, u32, u32) {
    fn from(p: Posting) -> Self {
        (p.doc_id, p.tf, p.doc_len)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostingList {
    pub term: String,
    pub df: usize,
    /// Sorted ascending by doc id.
    #[serde(rename = "docs")]
    pub postings: Vec<Posting>,
}

impl PostingList {
    pub fn tf(&self, doc_id: DocId) -> u32 {
        self.postings
            .binary_search_by_key(&doc_id, |p| p.doc_id)
            .map(|i| self.postings[i].tf)
            .unwrap_or(0)
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = DocId> + '_ {
        self.postings.iter().map(|p| p.doc_id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub n_docs: usize,
    pub avg_doc_len: f64,
    pub n_terms: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Title,
    Article,
}

impl Field {
    fn text(self, doc: &Document) -> &str {
        match self {
            Field::Title => &doc.title,
            Field::Article => &doc.article,
        }
    }
}

impl FromStr for Field {
    type Err = IndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "title" => Ok(Field::Title),
            "article" => Ok(Field::Article),
            other => Err(IndexError::UnknownField(other.to_owned())),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Title => "title",
            Field::Article => "article",
        })
    }
}

/// Which document fields feed the index, in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldPolicy(pub Vec<Field>);

impl Default for FieldPolicy {
    fn default() -> Self {
        FieldPolicy(vec![Field::Title, Field::Article])
    }
}

impl FieldPolicy {
    pub fn titles_only() -> Self {
        FieldPolicy(vec![Field::Title])
    }

    /// Parses a comma-separated list such as `title,article`.
    pub fn parse(list: &str) -> Result<Self, IndexError> {
        let fields = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FieldPolicy(fields))
    }

    /// The text that gets indexed for `doc`: selected fields joined by a space.
    pub fn indexed_text(&self, doc: &Document) -> String {
        self.0
            .iter()
            .map(|f| f.text(doc))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A frozen inverted index.
#[derive(Clone, Debug, PartialEq)]
pub struct Index {
    terms: BTreeMap<String, PostingList>,
    doc_lens: BTreeMap<DocId, u32>,
    config: PipelineConfig,
    fields: FieldPolicy,
    stats: IndexStats,
}

impl Index {
    /// Indexes every document of `corpus`. Documents whose indexed text
    /// normalizes to zero tokens are left out and do not count towards N.
    pub fn build(corpus: &Corpus, config: &PipelineConfig, fields: &FieldPolicy) -> Index {
        let mut terms: BTreeMap<String, PostingList> = BTreeMap::new();
        let mut doc_lens = BTreeMap::new();
        // Postings are appended in doc-id order so each list comes out sorted.
        let mut docs: Vec<&Document> = corpus.documents().iter().collect();
        docs.sort_by_key(|d| d.id);
        for doc in docs {
            let tokens = text::analyze(&fields.indexed_text(doc), config);
            if tokens.is_empty() {
                continue;
            }
            let doc_len = tokens.len() as u32;
            doc_lens.insert(doc.id, doc_len);
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for token in tokens {
                *counts.entry(token).or_default() += 1;
            }
            for (term, tf) in counts {
                let list = terms.entry(term).or_insert_with_key(|term| PostingList {
                    term: term.clone(),
                    df: 0,
                    postings: Vec::new(),
                });
                list.postings.push(Posting {
                    doc_id: doc.id,
                    tf,
                    doc_len,
                });
                list.df += 1;
            }
        }
        let stats = compute_stats(&doc_lens, terms.len());
        Index {
            terms,
            doc_lens,
            config: config.clone(),
            fields: fields.clone(),
            stats,
        }
    }

    /// Assembles an index from posting lists, checking every invariant.
    pub fn from_parts(
        postings: Vec<PostingList>,
        doc_lens: BTreeMap<DocId, u32>,
        config: PipelineConfig,
        fields: FieldPolicy,
    ) -> Result<Index, IndexError> {
        let mut terms = BTreeMap::new();
        for list in postings {
            validate_list(&list, &doc_lens)?;
            let term = list.term.clone();
            if terms.insert(term.clone(), list).is_some() {
                return Err(IndexError::Corrupt(format!("term {term:?} listed twice")));
            }
        }
        if let Some((&id, _)) = doc_lens.iter().find(|(_, &len)| len == 0) {
            return Err(IndexError::Corrupt(format!("doc {id} has zero length")));
        }
        let stats = compute_stats(&doc_lens, terms.len());
        Ok(Index {
            terms,
            doc_lens,
            config,
            fields,
            stats,
        })
    }

    pub fn stats(&self) -> IndexStats {
        self.stats
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn fields(&self) -> &FieldPolicy {
        &self.fields
    }

    pub fn lookup(&self, term: &str) -> Option<&PostingList> {
        self.terms.get(term)
    }

    pub fn posting_lists(&self) -> impl Iterator<Item = &PostingList> {
        self.terms.values()
    }

    pub fn doc_len(&self, doc_id: DocId) -> Option<u32> {
        self.doc_lens.get(&doc_id).copied()
    }

    pub fn doc_lens(&self) -> &BTreeMap<DocId, u32> {
        &self.doc_lens
    }

    pub fn contains_doc(&self, doc_id: DocId) -> bool {
        self.doc_lens.contains_key(&doc_id)
    }

    /// Normalizes raw query text with the pipeline this index was built with.
    pub fn analyze(&self, text: &str) -> Vec<String> {
        text::analyze(text, &self.config)
    }

    /// Fallback candidates for a term that is not in the vocabulary.
    ///
    /// Tiers, best first: terms starting with `raw_term`, terms containing it,
    /// then terms within Levenshtein distance 2. Inside a tier, higher df wins,
    /// then lexicographic order. The term itself is never returned.
    pub fn fuzzy_terms(&self, raw_term: &str, limit: usize) -> Result<Vec<String>, IndexError> {
        if raw_term.is_empty() {
            return Err(IndexError::EmptyTerm);
        }
        let query_chars = raw_term.chars().count();
        let mut ranked: Vec<(u8, std::cmp::Reverse<usize>, &str)> = self
            .terms
            .values()
            .filter(|list| list.term != raw_term)
            .filter_map(|list| {
                let term = list.term.as_str();
                let tier = if term.starts_with(raw_term) {
                    0
                } else if term.contains(raw_term) {
                    1
                } else if term.chars().count().abs_diff(query_chars) <= 2
                    && strsim::levenshtein(term, raw_term) <= 2
                {
                    2
                } else {
                    return None;
                };
                Some((tier, std::cmp::Reverse(list.df), term))
            })
            .collect();
        ranked.sort_unstable();
        Ok(ranked
            .into_iter()
            .take(limit)
            .map(|(_, _, term)| term.to_owned())
            .collect())
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), IndexError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(io_at(dir))?;

        let stats_path = dir.join(STATS_FILE);
        let stats = StatsFile {
            format_version: FORMAT_VERSION,
            n_docs: self.stats.n_docs,
            avg_doc_len: self.stats.avg_doc_len,
            n_terms: self.stats.n_terms,
            pipeline: self.config.clone(),
            fields: self.fields.clone(),
            doc_lens: self.doc_lens.iter().map(|(&id, &len)| (id, len)).collect(),
        };
        let mut out = BufWriter::new(File::create(&stats_path).map_err(io_at(&stats_path))?);
        serde_json::to_writer_pretty(&mut out, &stats)
            .map_err(io::Error::from)
            .and_then(|_| out.write_all(b"\n"))
            .and_then(|_| out.flush())
            .map_err(io_at(&stats_path))?;

        let postings_path = dir.join(POSTINGS_FILE);
        let write = || -> io::Result<()> {
            let mut out = BufWriter::new(File::create(&postings_path)?);
            let header = PostingsHeader {
                format_version: FORMAT_VERSION,
                n_terms: self.terms.len(),
            };
            serde_json::to_writer(&mut out, &header)?;
            out.write_all(b"\n")?;
            for list in self.terms.values() {
                serde_json::to_writer(&mut out, list)?;
                out.write_all(b"\n")?;
            }
            out.flush()
        };
        write().map_err(io_at(&postings_path))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Index, IndexError> {
        let dir = dir.as_ref();
        let stats_path = dir.join(STATS_FILE);
        let raw = fs::read_to_string(&stats_path).map_err(io_at(&stats_path))?;
        let version: VersionProbe =
            serde_json::from_str(&raw).map_err(|source| IndexError::Parse {
                path: stats_path.clone(),
                line: source.line(),
                source,
            })?;
        check_version(&stats_path, version.format_version)?;
        let stats: StatsFile = serde_json::from_str(&raw).map_err(|source| IndexError::Parse {
            path: stats_path.clone(),
            line: source.line(),
            source,
        })?;

        let postings_path = dir.join(POSTINGS_FILE);
        let file = File::open(&postings_path).map_err(io_at(&postings_path))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let parse_err = |line: usize, source| IndexError::Parse {
            path: postings_path.clone(),
            line,
            source,
        };
        let header: PostingsHeader = match lines.next() {
            Some((_, line)) => {
                let line = line.map_err(io_at(&postings_path))?;
                let probe: VersionProbe =
                    serde_json::from_str(&line).map_err(|e| parse_err(1, e))?;
                check_version(&postings_path, probe.format_version)?;
                serde_json::from_str(&line).map_err(|e| parse_err(1, e))?
            }
            None => {
                return Err(IndexError::Corrupt(format!(
                    "{} is empty",
                    postings_path.display()
                )))
            }
        };
        let mut lists = Vec::with_capacity(header.n_terms);
        for (idx, line) in lines {
            let line = line.map_err(io_at(&postings_path))?;
            if line.trim().is_empty() {
                continue;
            }
            lists.push(serde_json::from_str(&line).map_err(|e| parse_err(idx + 1, e))?);
        }
        if lists.len() != header.n_terms || lists.len() != stats.n_terms {
            return Err(IndexError::Corrupt(format!(
                "expected {} posting lists, found {}",
                header.n_terms,
                lists.len()
            )));
        }
        let doc_lens: BTreeMap<DocId, u32> = stats.doc_lens.into_iter().collect();
        let index = Index::from_parts(lists, doc_lens, stats.pipeline, stats.fields)?;
        if index.stats.n_docs != stats.n_docs {
            return Err(IndexError::Corrupt(format!(
                "stats report {} documents, lengths cover {}",
                stats.n_docs, index.stats.n_docs
            )));
        }
        Ok(index)
    }
}

fn compute_stats(doc_lens: &BTreeMap<DocId, u32>, n_terms: usize) -> IndexStats {
    let n_docs = doc_lens.len();
    let total: u64 = doc_lens.values().map(|&l| u64::from(l)).sum();
    let avg_doc_len = if n_docs == 0 {
        0.0
    } else {
        total as f64 / n_docs as f64
    };
    IndexStats {
        n_docs,
        avg_doc_len,
        n_terms,
    }
}

fn validate_list(list: &PostingList, doc_lens: &BTreeMap<DocId, u32>) -> Result<(), IndexError> {
    let corrupt = |what: String| Err(IndexError::Corrupt(format!("term {:?}: {what}", list.term)));
    if list.term.is_empty() {
        return corrupt("empty term".into());
    }
    if list.df != list.postings.len() || list.df == 0 {
        return corrupt(format!(
            "df {} but {} postings",
            list.df,
            list.postings.len()
        ));
    }
    let mut prev = None;
    for p in &list.postings {
        if prev.is_some_and(|prev| p.doc_id <= prev) {
            return corrupt(format!("doc ids not strictly increasing at {}", p.doc_id));
        }
        prev = Some(p.doc_id);
        if p.tf == 0 || p.tf > p.doc_len {
            return corrupt(format!(
                "doc {}: tf {} doc_len {}",
                p.doc_id, p.tf, p.doc_len
            ));
        }
        if doc_lens.get(&p.doc_id) != Some(&p.doc_len) {
            return corrupt(format!("doc {}: length disagrees with stats", p.doc_id));
        }
    }
    Ok(())
}

fn check_version(path: &Path, found: u32) -> Result<(), IndexError> {
    if found == FORMAT_VERSION {
        Ok(())
    } else {
        Err(IndexError::VersionMismatch {
            path: path.to_owned(),
            found,
        })
    }
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> IndexError + '_ {
    move |source| IndexError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

#[derive(Serialize, Deserialize)]
struct PostingsHeader {
    format_version: u32,
    n_terms: usize,
}

#[derive(Serialize, Deserialize)]
struct StatsFile {
    format_version: u32,
    n_docs: usize,
    avg_doc_len: f64,
    n_terms: usize,
    pipeline: PipelineConfig,
    fields: FieldPolicy,
    doc_lens: Vec<(DocId, u32)>,
}
