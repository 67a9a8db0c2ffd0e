//! Precision/recall evaluation of search runs and sentiment predictions.
//!
//! P = RN / TRN × 100 and R = RN / TNS × 100, where RN counts relevant
//! retrieved documents, TRN all retrieved documents and TNS all relevant
//! documents. A zero denominator leaves the value undefined (`None`).
//!
//! File formats (tab-separated, `#` lines and blank lines ignored):
//! * qrels: `query_id  doc_id  rel` with rel 0 or 1
//! * queries: `query_id  query_text  [category]`
//! * run: `query_id  doc_id  rank`

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, DocId};
use crate::sentiment::SentimentClass;

pub type QueryId = String;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("run contains unjudged query {0:?}")]
    UnjudgedQuery(QueryId),
    #[error("judged document {doc_id} (query {query_id:?}) is not in the corpus")]
    UnknownDocument { query_id: QueryId, doc_id: DocId },
    #[error("query sets differ: {0}")]
    QuerySetMismatch(String),
    #[error("document sets differ: {0}")]
    DocSetMismatch(String),
}

/// RN / TRN × 100, undefined when nothing was retrieved.
pub fn precision(relevant_retrieved: usize, total_retrieved: usize) -> Option<f64> {
    (total_retrieved > 0).then(|| relevant_retrieved as f64 / total_retrieved as f64 * 100.0)
}

/// RN / TNS × 100, undefined when nothing is relevant.
pub fn recall(relevant_retrieved: usize, total_relevant: usize) -> Option<f64> {
    (total_relevant > 0).then(|| relevant_retrieved as f64 / total_relevant as f64 * 100.0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub text: String,
    pub category: Option<String>,
}

/// Binary relevance judgments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<QueryId, BTreeMap<DocId, bool>>,
    queries: BTreeMap<QueryId, QuerySpec>,
}

impl Qrels {
    pub fn new() -> Qrels {
        Qrels::default()
    }

    pub fn judge(&mut self, query_id: impl Into<QueryId>, doc_id: DocId, relevant: bool) {
        self.judgments
            .entry(query_id.into())
            .or_default()
            .insert(doc_id, relevant);
    }

    pub fn add_query(&mut self, query_id: impl Into<QueryId>, spec: QuerySpec) {
        let id = query_id.into();
        self.judgments.entry(id.clone()).or_default();
        self.queries.insert(id, spec);
    }

    pub fn queries(&self) -> &BTreeMap<QueryId, QuerySpec> {
        &self.queries
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &QueryId> {
        self.judgments.keys()
    }

    pub fn relevant(&self, query_id: &str) -> BTreeSet<DocId> {
        self.judgments
            .get(query_id)
            .map(|j| {
                j.iter()
                    .filter(|(_, &rel)| rel)
                    .map(|(&id, _)| id)
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn is_judged(&self, query_id: &str) -> bool {
        self.judgments.contains_key(query_id)
    }

    /// Checks that every judged document exists in `corpus`.
    pub fn validate_against(&self, corpus: &Corpus) -> Result<(), EvalError> {
        for (query_id, docs) in &self.judgments {
            if let Some(&doc_id) = docs.keys().find(|id| !corpus.contains(**id)) {
                return Err(EvalError::UnknownDocument {
                    query_id: query_id.clone(),
                    doc_id,
                });
            }
        }
        Ok(())
    }

    pub fn parse_qrels(input: &str) -> Result<Qrels, EvalError> {
        let mut qrels = Qrels::new();
        for (line, cols) in tsv_rows(input) {
            let [qid, doc, rel] = cols[..] else {
                return Err(parse_err(line, "expected query_id<TAB>doc_id<TAB>rel"));
            };
            let doc_id = parse_doc(line, doc)?;
            let relevant = match rel {
                "0" => false,
                "1" => true,
                other => {
                    return Err(parse_err(
                        line,
                        format!("relevance {other:?} is not 0 or 1"),
                    ))
                }
            };
            qrels.judge(qid, doc_id, relevant);
        }
        Ok(qrels)
    }

    /// Adds query texts from a queries TSV.
    pub fn parse_queries(&mut self, input: &str) -> Result<(), EvalError> {
        for (line, cols) in tsv_rows(input) {
            let (qid, text, category) = match cols[..] {
                [qid, text] => (qid, text, None),
                [qid, text, cat] => (qid, text, (!cat.is_empty()).then(|| cat.to_owned())),
                _ => return Err(parse_err(line, "expected query_id<TAB>text[<TAB>category]")),
            };
            self.add_query(
                qid,
                QuerySpec {
                    text: text.to_owned(),
                    category,
                },
            );
        }
        Ok(())
    }

    pub fn load(qrels: impl AsRef<Path>, queries: Option<&Path>) -> Result<Qrels, EvalError> {
        let mut q = Qrels::parse_qrels(&read(qrels.as_ref())?)?;
        if let Some(path) = queries {
            q.parse_queries(&read(path)?)?;
        }
        Ok(q)
    }
}

/// query id -> retrieved doc ids in rank order.
pub type Run = BTreeMap<QueryId, Vec<DocId>>;

pub fn parse_run(input: &str) -> Result<Run, EvalError> {
    let mut rows: BTreeMap<QueryId, Vec<(u64, DocId)>> = BTreeMap::new();
    for (line, cols) in tsv_rows(input) {
        let [qid, doc, rank] = cols[..] else {
            return Err(parse_err(line, "expected query_id<TAB>doc_id<TAB>rank"));
        };
        let doc_id = parse_doc(line, doc)?;
        let rank: u64 = rank
            .parse()
            .map_err(|_| parse_err(line, format!("rank {rank:?} is not a non-negative integer")))?;
        rows.entry(qid.to_owned()).or_default().push((rank, doc_id));
    }
    Ok(rows
        .into_iter()
        .map(|(qid, mut docs)| {
            docs.sort();
            (qid, docs.into_iter().map(|(_, d)| d).collect())
        })
        .collect())
}

pub fn load_run(path: impl AsRef<Path>) -> Result<Run, EvalError> {
    parse_run(&read(path.as_ref())?)
}

pub fn format_run(run: &Run) -> String {
    let mut out = String::new();
    for (qid, docs) in run {
        for (rank, doc) in docs.iter().enumerate() {
            let _ = writeln!(out, "{qid}\t{doc}\t{}", rank + 1);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryEval {
    pub query_id: QueryId,
    /// Relevant retrieved (RN).
    pub rn: usize,
    /// Total retrieved (TRN).
    pub trn: usize,
    /// Total relevant (TNS).
    pub tns: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub queries: Vec<QueryEval>,
    /// Mean over queries with a defined value.
    pub macro_precision: Option<f64>,
    pub macro_recall: Option<f64>,
}

impl EvalReport {
    pub fn query(&self, query_id: &str) -> Option<&QueryEval> {
        self.queries.iter().find(|q| q.query_id == query_id)
    }
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Scores every query of the run; duplicate doc ids count once.
pub fn evaluate_run(qrels: &Qrels, run: &Run) -> Result<EvalReport, EvalError> {
    if let Some(qid) = run.keys().find(|q| !qrels.is_judged(q)) {
        return Err(EvalError::UnjudgedQuery(qid.clone()));
    }
    let queries: Vec<QueryEval> = run
        .iter()
        .map(|(qid, docs)| {
            let retrieved: BTreeSet<DocId> = docs.iter().copied().collect();
            let relevant = qrels.relevant(qid);
            let rn = retrieved.intersection(&relevant).count();
            let (trn, tns) = (retrieved.len(), relevant.len());
            QueryEval {
                query_id: qid.clone(),
                rn,
                trn,
                tns,
                precision: precision(rn, trn),
                recall: recall(rn, tns),
            }
        })
        .collect();
    Ok(EvalReport {
        macro_precision: mean(queries.iter().map(|q| q.precision)),
        macro_recall: mean(queries.iter().map(|q| q.recall)),
        queries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryDelta {
    pub query_id: QueryId,
    pub a: QueryEval,
    pub b: QueryEval,
    /// b − a; absent when either side is undefined.
    pub delta_precision: Option<f64>,
    pub delta_recall: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub queries: Vec<QueryDelta>,
    pub macro_a: (Option<f64>, Option<f64>),
    pub macro_b: (Option<f64>, Option<f64>),
    pub delta_macro_precision: Option<f64>,
    pub delta_macro_recall: Option<f64>,
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(b? - a?)
}

/// Compares run `b` against baseline `a` query by query.
pub fn compare_runs(qrels: &Qrels, run_a: &Run, run_b: &Run) -> Result<Comparison, EvalError> {
    let keys_a: BTreeSet<_> = run_a.keys().collect();
    let keys_b: BTreeSet<_> = run_b.keys().collect();
    if keys_a != keys_b {
        let only: Vec<_> = keys_a.symmetric_difference(&keys_b).collect();
        return Err(EvalError::QuerySetMismatch(format!("{only:?}")));
    }
    let ra = evaluate_run(qrels, run_a)?;
    let rb = evaluate_run(qrels, run_b)?;
    let queries = ra
        .queries
        .into_iter()
        .zip(rb.queries)
        .map(|(a, b)| QueryDelta {
            query_id: a.query_id.clone(),
            delta_precision: diff(a.precision, b.precision),
            delta_recall: diff(a.recall, b.recall),
            a,
            b,
        })
        .collect();
    Ok(Comparison {
        queries,
        macro_a: (ra.macro_precision, ra.macro_recall),
        macro_b: (rb.macro_precision, rb.macro_recall),
        delta_macro_precision: diff(ra.macro_precision, rb.macro_precision),
        delta_macro_recall: diff(ra.macro_recall, rb.macro_recall),
    })
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.1}"))
}

fn signed(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:+.1}"))
}

impl EvalReport {
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<12} {:>6} {:>6} {:>6} {:>8} {:>8}\n",
            "query", "RN", "TRN", "TNS", "P%", "R%"
        );
        for q in &self.queries {
            let _ = writeln!(
                out,
                "{:<12} {:>6} {:>6} {:>6} {:>8} {:>8}",
                q.query_id,
                q.rn,
                q.trn,
                q.tns,
                pct(q.precision),
                pct(q.recall)
            );
        }
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>6} {:>6} {:>8} {:>8}",
            "macro",
            "",
            "",
            "",
            pct(self.macro_precision),
            pct(self.macro_recall)
        );
        out
    }
}

impl Comparison {
    /// Aligned text table: P/R of both runs and the b − a deltas.
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<12} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            "query", "P_a%", "R_a%", "P_b%", "R_b%", "dP", "dR"
        );
        for q in &self.queries {
            let _ = writeln!(
                out,
                "{:<12} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
                q.query_id,
                pct(q.a.precision),
                pct(q.a.recall),
                pct(q.b.precision),
                pct(q.b.recall),
                signed(q.delta_precision),
                signed(q.delta_recall)
            );
        }
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "macro",
            pct(self.macro_a.0),
            pct(self.macro_a.1),
            pct(self.macro_b.0),
            pct(self.macro_b.1),
            signed(self.delta_macro_precision),
            signed(self.delta_macro_recall)
        );
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassEval {
    pub class: SentimentClass,
    pub correct: usize,
    pub predicted: usize,
    pub gold: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentEval {
    pub classes: Vec<ClassEval>,
    pub macro_precision: Option<f64>,
    pub macro_recall: Option<f64>,
}

/// Per-class precision and recall of predicted sentiment classes.
pub fn evaluate_sentiment(
    gold: &BTreeMap<DocId, SentimentClass>,
    predictions: &BTreeMap<DocId, SentimentClass>,
) -> Result<SentimentEval, EvalError> {
    if gold.len() != predictions.len() || gold.keys().any(|id| !predictions.contains_key(id)) {
        let g: BTreeSet<_> = gold.keys().collect();
        let p: BTreeSet<_> = predictions.keys().collect();
        let only: Vec<_> = g.symmetric_difference(&p).collect();
        return Err(EvalError::DocSetMismatch(format!("{only:?}")));
    }
    let classes: Vec<ClassEval> = SentimentClass::ALL
        .iter()
        .map(|&class| {
            let gold_n = gold.values().filter(|&&c| c == class).count();
            let predicted = predictions.values().filter(|&&c| c == class).count();
            let correct = gold
                .iter()
                .filter(|(id, &g)| g == class && predictions[id] == class)
                .count();
            ClassEval {
                class,
                correct,
                predicted,
                gold: gold_n,
                precision: precision(correct, predicted),
                recall: recall(correct, gold_n),
            }
        })
        .collect();
    Ok(SentimentEval {
        macro_precision: mean(classes.iter().map(|c| c.precision)),
        macro_recall: mean(classes.iter().map(|c| c.recall)),
        classes,
    })
}

impl SentimentEval {
    pub fn class(&self, class: SentimentClass) -> &ClassEval {
        self.classes
            .iter()
            .find(|c| c.class == class)
            .expect("all classes present")
    }
}

fn read(path: &Path) -> Result<String, EvalError> {
    fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_owned(),
        source,
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> EvalError {
    EvalError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_doc(line: usize, s: &str) -> Result<DocId, EvalError> {
    s.parse()
        .map_err(|_| parse_err(line, format!("doc id {s:?} is not a positive integer")))
}

fn tsv_rows(input: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    input.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, trimmed.split('\t').map(str::trim).collect()))
        }
    })
}
