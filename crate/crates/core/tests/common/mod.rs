//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use sentisearch_core::index::{FieldPolicy, Index, Posting, PostingList};
use sentisearch_core::text::{self, PipelineConfig};
use sentisearch_core::{Corpus, DocId, Document};

// also compiled into the server crate's acceptance runner
const CORE_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core");

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(CORE_DIR).join("tests/data").join(name)
}

pub fn fig1_corpus() -> Corpus {
    Corpus::load(data_path("fig1_news.jsonl")).expect("fixture corpus loads")
}

/// Term, df and the visible (possibly truncated) postings of the index table
/// figure.
const FIG2_ROWS: &str = "\
sarah\t7\t[11, 1, 10][12, 1, 9][21, 1, 10][34, 1, 9][36, 1, 10][39, 1, 9][42, 1, 8]
everard\t7\t[11, 1, 10][12, 1, 9][21, 1, 10][34, 1, 9][36, 1, 10][39, 1, 9][42, 1, 8]
disappearance\t2\t[11, 1, 10][34, 1, 9]
met\t7\t[11, 1, 10][329, 1, 11][338, 1, 11][443, 1, 12][502, 1, 10][628, 1, 8][702, 1, 13]
officer\t10\t[11, 1, 10][18, 1, 12][293, 1, 8][342, 1, 11][347, 1, 10][369, 1, 10][382, 1, 12]
arrested\t5\t[11, 1, 10][315, 1, 10][368, 1, 8][599, 1, 10][632, 1, 10]
suspicion\t1\t[11, 1, 10]
murder\t15\t[11, 1, 10][29, 1, 7][99, 1, 9][114, 1, 11][135, 1, 9][235, 1, 9][285, 1, 11][304, 1, 9]
bbc\t697\t[11, 1, 10][12, 1, 9][13, 1, 9][14, 1, 8][15, 1, 8][16, 1, 9][17, 1, 9][18, 1, 12][19, 1, 9]
news\t697\t[11, 1, 10][12, 1, 9][13, 1, 9][14, 1, 8][15, 1, 8][16, 1, 9][17, 1, 9][18, 1, 12][19, 1, 9]
human\t1\t[12, 1, 9]
remains\t1\t[12, 1, 9]
found\t11\t[12, 1, 9][53, 1, 11][93, 1, 9][157, 1, 8][386, 1, 7][391, 1, 11][412, 1, 10][468, 1, 8]
kent\t3\t[12, 1, 9][34, 1, 9][99, 1, 9]
woodland\t1\t[12, 1, 9]
covid\t100\t[13, 1, 9][19, 1, 9][22, 1, 8][32, 1, 9][47, 1, 7][58, 1, 8][61, 1, 10][72, 1, 10][78, 1, 10]
scotland\t17\t[13, 1, 9][22, 1, 8][32, 1, 9][121, 1, 9][153, 1, 10][161, 1, 8][192, 1, 8][367, 1, 9]
rules\t6\t[13, 1, 9][19, 1, 9][71, 1, 9][123, 1, 9][321, 1, 11][669, 1, 12]
people\t11\t[13, 1, 9][134, 1, 11][245, 1, 9][346, 1, 8][363, 1, 9][370, 1, 7][484, 1, 10][510, 1, 10]
meeting\t1\t[13, 1, 9]
outdoors\t1\t[13, 1, 9]
eased\t2\t[13, 1, 9][321, 1, 11]
pmqs\t3\t[14, 1, 8][428, 1, 9][661, 1, 9]
happened\t23\t[14, 1, 8][61, 1, 10][98, 1, 6][155, 1, 8][168, 1, 10][202, 1, 7][246, 1, 8][270, 1, 10]";

pub const FIG2_CORPUS_SIZE: DocId = 800;

/// An index shaped like the index table figure over an 800-document
/// collection. Visible postings are kept verbatim; truncated lists are
/// padded with the lowest unused doc ids (length 9) up to the stated df.
pub fn fig2_index() -> Index {
    let mut rows = Vec::new();
    let mut doc_lens: BTreeMap<DocId, u32> = BTreeMap::new();
    for line in FIG2_ROWS.lines() {
        let mut cols = line.split('\t');
        let term = cols.next().unwrap().to_owned();
        let df: usize = cols.next().unwrap().parse().unwrap();
        let visible: Vec<(DocId, u32, u32)> = cols
            .next()
            .unwrap()
            .trim_matches(['[', ']'])
            .split("][")
            .map(|triple| {
                let v: Vec<u64> = triple.split(", ").map(|x| x.parse().unwrap()).collect();
                (v[0], v[1] as u32, v[2] as u32)
            })
            .collect();
        for &(id, _, len) in &visible {
            let prev = doc_lens.insert(id, len);
            assert!(
                prev.is_none() || prev == Some(len),
                "doc {id} length disagrees"
            );
        }
        rows.push((term, df, visible));
    }
    for id in 1..=FIG2_CORPUS_SIZE {
        doc_lens.entry(id).or_insert(9);
    }
    let lists = rows
        .into_iter()
        .map(|(term, df, visible)| {
            let mut docs: BTreeMap<DocId, u32> =
                visible.iter().map(|&(id, tf, _)| (id, tf)).collect();
            let mut next = 1;
            while docs.len() < df {
                docs.entry(next).or_insert(1);
                next += 1;
            }
            PostingList {
                term,
                df,
                postings: docs
                    .into_iter()
                    .map(|(doc_id, tf)| Posting {
                        doc_id,
                        tf,
                        doc_len: doc_lens[&doc_id],
                    })
                    .collect(),
            }
        })
        .collect();
    Index::from_parts(
        lists,
        doc_lens,
        PipelineConfig::default(),
        FieldPolicy::titles_only(),
    )
    .expect("fixture index is consistent")
}

pub fn date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 3, 10).unwrap()
}

pub const LABELS: [&str; 4] = ["nature", "business", "sport", "UK Politics"];

/// Random corpus over a vocabulary of `vocab` words (`w0`, `w1`, ...), with
/// stopwords, capitalization and punctuation sprinkled in.
pub fn random_corpus(rng: &mut impl Rng, n_docs: usize, vocab: usize) -> Corpus {
    let mut ids: Vec<DocId> = (1..=(n_docs as DocId * 3)).collect();
    ids.shuffle(rng);
    let docs = ids[..n_docs]
        .iter()
        .map(|&id| Document {
            id,
            label: LABELS[rng.gen_range(0..LABELS.len())].to_owned(),
            url: format!("http://news.example/{id}"),
            title: random_text(rng, 1..8, vocab),
            dt: date(),
            article: random_text(rng, 0..40, vocab),
        })
        .collect();
    Corpus::new(docs).unwrap()
}

pub fn random_text(rng: &mut impl Rng, words: std::ops::Range<usize>, vocab: usize) -> String {
    let n = rng.gen_range(words);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let word = match rng.gen_range(0..20) {
            0 => "the".to_owned(),
            1 => "And".to_owned(),
            2 => format!("W{}.", rng.gen_range(0..vocab)),
            3 => format!("\"w{}\"", rng.gen_range(0..vocab)),
            4 => "--".to_owned(),
            _ => format!("w{}", rng.gen_range(0..vocab)),
        };
        out.push(word);
    }
    out.join(if rng.gen_bool(0.5) { " " } else { "  " })
}

/// Per-document token lists computed directly from the documents.
pub fn doc_tokens(
    corpus: &Corpus,
    config: &PipelineConfig,
    fields: &FieldPolicy,
) -> BTreeMap<DocId, Vec<String>> {
    corpus
        .documents()
        .iter()
        .map(|d| (d.id, text::analyze(&fields.indexed_text(d), config)))
        .filter(|(_, t)| !t.is_empty())
        .collect()
}

/// Ids of documents whose token list contains `term`, by linear scan.
pub fn scan_docs_with(tokens: &BTreeMap<DocId, Vec<String>>, term: &str) -> BTreeSet<DocId> {
    tokens
        .iter()
        .filter(|(_, toks)| toks.iter().any(|t| t == term))
        .map(|(&id, _)| id)
        .collect()
}

/// BM25 evaluated straight from token lists.
pub fn oracle_bm25(
    tokens: &BTreeMap<DocId, Vec<String>>,
    query: &[String],
    doc: DocId,
    k1: f64,
    b: f64,
) -> f64 {
    let n = tokens.len() as f64;
    let avgdl = tokens.values().map(|t| t.len() as f64).sum::<f64>() / n;
    let dl = tokens[&doc].len() as f64;
    let distinct: BTreeSet<&String> = query.iter().collect();
    let mut total = 0.0;
    for q in distinct {
        let tf = tokens[&doc].iter().filter(|t| *t == q).count() as f64;
        if tf == 0.0 {
            continue;
        }
        let df = tokens.values().filter(|t| t.contains(q)).count() as f64;
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        total += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
    }
    total
}

/// Levenshtein distance by the textbook dynamic program.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in table[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            table[i][j] = sub.min(table[i - 1][j] + 1).min(table[i][j - 1] + 1);
        }
    }
    table[a.len()][b.len()]
}

pub const PLANTED_CATEGORIES: [&str; 3] = ["nature", "technology", "business"];

/// Polysemous query terms and the category holding their relevant sense.
pub const PLANTED_QUERIES: [(&str, &str, &str); 3] = [
    ("q1", "jaguar", "nature"),
    ("q2", "python", "technology"),
    ("q3", "apple", "business"),
];

const CATEGORY_WORDS: [&[&str]; 3] = [
    &[
        "rainforest",
        "species",
        "habitat",
        "predator",
        "river",
        "wildlife",
        "cubs",
        "conservation",
    ],
    &[
        "software",
        "release",
        "developer",
        "library",
        "compiler",
        "server",
        "version",
        "code",
    ],
    &[
        "shares",
        "profit",
        "market",
        "investors",
        "quarter",
        "revenue",
        "stock",
        "earnings",
    ],
];

const SHARED_WORDS: [&str; 8] = [
    "report", "new", "week", "year", "people", "today", "latest", "update",
];

/// A labeled corpus in which each polysemous term occurs in every category,
/// plus judgments marking only the occurrences in the term's own category
/// as relevant.
pub fn planted_corpus(
    rng: &mut impl Rng,
    n_docs: usize,
) -> (Corpus, sentisearch_core::eval::Qrels) {
    use sentisearch_core::eval::{Qrels, QuerySpec};
    let mut qrels = Qrels::new();
    for (qid, term, category) in PLANTED_QUERIES {
        qrels.add_query(
            qid,
            QuerySpec {
                text: term.to_owned(),
                category: Some(category.to_owned()),
            },
        );
    }
    let mut docs = Vec::with_capacity(n_docs);
    for i in 0..n_docs {
        let id = i as DocId + 1;
        let c = i % PLANTED_CATEGORIES.len();
        let mut words: Vec<&str> = (0..rng.gen_range(4..12))
            .map(|_| {
                if rng.gen_bool(0.7) {
                    CATEGORY_WORDS[c][rng.gen_range(0..CATEGORY_WORDS[c].len())]
                } else {
                    SHARED_WORDS[rng.gen_range(0..SHARED_WORDS.len())]
                }
            })
            .collect();
        for (qid, term, category) in PLANTED_QUERIES {
            if rng.gen_bool(0.2) {
                let at = rng.gen_range(0..=words.len());
                words.insert(at, term);
                qrels.judge(qid, id, PLANTED_CATEGORIES[c] == category);
            }
        }
        docs.push(Document {
            id,
            label: PLANTED_CATEGORIES[c].to_owned(),
            url: format!("http://news.example/{id}"),
            title: words[..words.len() / 2].join(" "),
            dt: date(),
            article: words[words.len() / 2..].join(" "),
        });
    }
    (Corpus::new(docs).unwrap(), qrels)
}

/// P and R straight from sets, as (rn, trn, tns, P, R).
pub fn oracle_pr(
    retrieved: &BTreeSet<DocId>,
    relevant: &BTreeSet<DocId>,
) -> (usize, usize, usize, Option<f64>, Option<f64>) {
    let rn = retrieved.iter().filter(|d| relevant.contains(d)).count();
    let (trn, tns) = (retrieved.len(), relevant.len());
    let p = if trn == 0 {
        None
    } else {
        Some(rn as f64 / trn as f64 * 100.0)
    };
    let r = if tns == 0 {
        None
    } else {
        Some(rn as f64 / tns as f64 * 100.0)
    };
    (rn, trn, tns, p, r)
}

pub fn sentiment_fixture() -> Corpus {
    Corpus::load(data_path("sentiment_fixture.jsonl")).expect("sentiment fixture loads")
}

/// Hand-worked (positive, negative, class) per fixture document.
pub fn sentiment_expected() -> BTreeMap<DocId, (i32, i32, sentisearch_core::SentimentClass)> {
    std::fs::read_to_string(data_path("sentiment_expected.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            let class = sentisearch_core::SentimentClass::parse(cols[3]).unwrap();
            (
                cols[0].parse().unwrap(),
                (cols[1].parse().unwrap(), cols[2].parse().unwrap(), class),
            )
        })
        .collect()
}

/// One row of the crawler fixture expectations.
pub struct ExpectedPage {
    pub url: String,
    pub title: String,
    pub label: String,
    /// None means the fetch date.
    pub dt: Option<NaiveDate>,
    pub article: String,
}

pub fn expected_pages() -> Vec<ExpectedPage> {
    std::fs::read_to_string(data_path("pages/expected.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            ExpectedPage {
                url: c[0].into(),
                title: c[1].into(),
                label: c[2].into(),
                dt: (!c[3].is_empty()).then(|| c[3].parse().unwrap()),
                article: c[4].into(),
            }
        })
        .collect()
}
