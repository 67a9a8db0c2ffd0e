//! The news document store.
//!
//! A corpus is persisted as JSON Lines, one record per line with exactly the
//! fields `id, label, url, title, dt, article`. Ids are assigned by whoever
//! produces the file; the store only validates them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type DocId = u64;

/// One news record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: DocId,
    pub label: String,
    pub url: String,
    pub title: String,
    /// Publication date, serialized as `YYYY-MM-DD`.
    pub dt: NaiveDate,
    pub article: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: malformed record: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: invalid date {value:?} (expected YYYY-MM-DD)")]
    InvalidDate { line: usize, value: String },
    #[error("duplicate document id {0}")]
    DuplicateId(DocId),
    #[error("document {id}: {reason}")]
    InvalidDocument { id: DocId, reason: &'static str },
}

/// Raw line shape; every field optional so that a missing one can be reported
/// by name rather than through serde's message text.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: Option<DocId>,
    label: Option<String>,
    url: Option<String>,
    title: Option<String>,
    dt: Option<String>,
    article: Option<String>,
}

impl Record {
    fn into_document(self, line: usize) -> Result<Document, CorpusError> {
        let missing = |field| CorpusError::MissingField { line, field };
        let dt = self.dt.ok_or_else(|| missing("dt"))?;
        let dt = NaiveDate::parse_from_str(&dt, "%Y-%m-%d")
            .map_err(|_| CorpusError::InvalidDate { line, value: dt })?;
        Ok(Document {
            id: self.id.ok_or_else(|| missing("id"))?,
            label: self.label.ok_or_else(|| missing("label"))?,
            url: self.url.ok_or_else(|| missing("url"))?,
            title: self.title.ok_or_else(|| missing("title"))?,
            dt,
            article: self.article.ok_or_else(|| missing("article"))?,
        })
    }
}

/// An immutable, validated collection of documents.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    positions: HashMap<DocId, usize>,
    label_index: BTreeMap<String, BTreeSet<DocId>>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        // positions and label_index are derived from documents
        self.documents == other.documents
    }
}

impl Corpus {
    /// Validates `documents` and builds the label grouping. Order is kept.
    pub fn new(documents: Vec<Document>) -> Result<Self, CorpusError> {
        let mut positions = HashMap::with_capacity(documents.len());
        for (pos, doc) in documents.iter().enumerate() {
            validate(doc)?;
            if positions.insert(doc.id, pos).is_some() {
                return Err(CorpusError::DuplicateId(doc.id));
            }
        }
        let label_index = group_by_label(&documents);
        Ok(Corpus {
            documents,
            positions,
            label_index,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: DocId) -> Option<&Document> {
        self.positions.get(&id).map(|&pos| &self.documents[pos])
    }

    pub fn contains(&self, id: DocId) -> bool {
        self.positions.contains_key(&id)
    }

    pub fn label_index(&self) -> &BTreeMap<String, BTreeSet<DocId>> {
        &self.label_index
    }

    /// Distinct labels in lexicographic order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.label_index.keys().map(String::as_str)
    }

    /// Ids of documents whose label equals `label` exactly (case-sensitive).
    pub fn docs_by_label(&self, label: &str) -> BTreeSet<DocId> {
        self.label_index.get(label).cloned().unwrap_or_default()
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.label_index.contains_key(label)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_reader(BufReader::new(file)).map_err(|e| match e {
            CorpusError::Io { source, .. } => CorpusError::Io {
                path: path.to_owned(),
                source,
            },
            other => other,
        })
    }

    /// Parses JSONL from any reader. Blank lines are skipped; line numbers in
    /// errors are 1-based.
    pub fn from_reader(reader: impl BufRead) -> Result<Self, CorpusError> {
        let mut documents = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|source| CorpusError::Io {
                path: PathBuf::new(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record =
                serde_json::from_str(&line).map_err(|source| CorpusError::Malformed {
                    line: line_no,
                    source,
                })?;
            documents.push(record.into_document(line_no)?);
        }
        Self::new(documents)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let io_err = |source| CorpusError::Io {
            path: path.to_owned(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut out = BufWriter::new(file);
        self.write_to(&mut out).map_err(io_err)?;
        out.flush().map_err(io_err)
    }

    pub fn write_to(&self, out: &mut impl Write) -> io::Result<()> {
        for doc in &self.documents {
            write_document(out, doc)?;
        }
        Ok(())
    }
}

/// Writes one JSONL record, newline-terminated.
pub fn write_document(out: &mut impl Write, doc: &Document) -> io::Result<()> {
    serde_json::to_writer(&mut *out, doc)?;
    out.write_all(b"\n")
}

fn validate(doc: &Document) -> Result<(), CorpusError> {
    let reason = if doc.id == 0 {
        "id must be positive"
    } else if doc.label.is_empty() {
        "label is empty"
    } else if doc.title.is_empty() {
        "title is empty"
    } else {
        return Ok(());
    };
    Err(CorpusError::InvalidDocument { id: doc.id, reason })
}

fn group_by_label(documents: &[Document]) -> BTreeMap<String, BTreeSet<DocId>> {
    let mut index: BTreeMap<String, BTreeSet<DocId>> = BTreeMap::new();
    for doc in documents {
        index.entry(doc.label.clone()).or_default().insert(doc.id);
    }
    index
}
