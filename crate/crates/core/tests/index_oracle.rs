mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sentisearch_core::index::{FieldPolicy, Posting, PostingList};
use sentisearch_core::text::PipelineConfig;
use sentisearch_core::{Corpus, DocId, Document, Index};

fn check_against_scan(corpus: &Corpus, config: &PipelineConfig, fields: &FieldPolicy) {
    let index = Index::build(corpus, config, fields);
    let tokens = common::doc_tokens(corpus, config, fields);
    let vocab: BTreeSet<&String> = tokens.values().flatten().collect();
    assert_eq!(index.stats().n_terms, vocab.len());
    assert_eq!(index.stats().n_docs, tokens.len());
    for term in &vocab {
        let list = index.lookup(term).expect("every seen term is indexed");
        let ids: BTreeSet<DocId> = list.doc_ids().collect();
        assert_eq!(ids, common::scan_docs_with(&tokens, term), "term {term}");
        assert_eq!(list.df, list.postings.len());
        for p in &list.postings {
            let tf = tokens[&p.doc_id].iter().filter(|t| t == term).count() as u32;
            assert_eq!(p.tf, tf);
        }
    }
    let mut tf_sums: BTreeMap<DocId, u32> = BTreeMap::new();
    for list in index.posting_lists() {
        for p in &list.postings {
            *tf_sums.entry(p.doc_id).or_default() += p.tf;
            assert_eq!(Some(p.doc_len), index.doc_len(p.doc_id));
        }
    }
    for (id, toks) in &tokens {
        assert_eq!(tf_sums[id] as usize, toks.len());
        assert_eq!(index.doc_len(*id), Some(toks.len() as u32));
    }
    assert!(index.lookup("the").is_none());
    assert!(index.lookup("zzz-not-a-term").is_none());
}

#[test]
fn lookup_matches_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..20 {
        let corpus = common::random_corpus(&mut rng, 20 + trial * 9, 50 + trial * 20);
        check_against_scan(&corpus, &PipelineConfig::default(), &FieldPolicy::default());
        check_against_scan(
            &corpus,
            &PipelineConfig::default(),
            &FieldPolicy::titles_only(),
        );
    }
}

#[test]
fn stemmed_index_matches_linear_scan() {
    let docs = [
        "Running runners run daily",
        "The officer arrested suspects",
        "Arresting officers and running",
        "Generalizations about generalized relational data",
    ]
    .iter()
    .enumerate()
    .map(|(i, title)| Document {
        id: i as DocId + 1,
        label: "x".into(),
        url: String::new(),
        title: title.to_string(),
        dt: common::date(),
        article: String::new(),
    })
    .collect();
    let corpus = Corpus::new(docs).unwrap();
    let config = PipelineConfig::default().with_stemming(true);
    check_against_scan(&corpus, &config, &FieldPolicy::titles_only());
    let index = Index::build(&corpus, &config, &FieldPolicy::titles_only());
    assert_eq!(
        index
            .lookup("arrest")
            .unwrap()
            .doc_ids()
            .collect::<Vec<_>>(),
        [2, 3]
    );
    assert_eq!(index.analyze("Running"), ["run"]);
}

#[test]
fn fuzzy_terms_match_tiered_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let corpus = common::random_corpus(&mut rng, 150, 300);
    let index = Index::build(&corpus, &PipelineConfig::default(), &FieldPolicy::default());
    let terms: Vec<(&str, usize)> = index
        .posting_lists()
        .map(|l| (l.term.as_str(), l.df))
        .collect();
    for probe in ["w1", "w12", "w3", "w29", "2", "w", "w1000", "x12", "ww3"] {
        let mut expected: Vec<(u8, std::cmp::Reverse<usize>, &str)> = terms
            .iter()
            .filter(|(t, _)| *t != probe)
            .filter_map(|&(t, df)| {
                let tier = if t.starts_with(probe) {
                    0
                } else if t.contains(probe) {
                    1
                } else if common::edit_distance(t, probe) <= 2 {
                    2
                } else {
                    return None;
                };
                Some((tier, std::cmp::Reverse(df), t))
            })
            .collect();
        expected.sort();
        let expected: Vec<&str> = expected.iter().take(8).map(|e| e.2).collect();
        assert_eq!(
            index.fuzzy_terms(probe, 8).unwrap(),
            expected,
            "probe {probe}"
        );
    }
    assert!(index.fuzzy_terms("", 3).is_err());
}

#[test]
fn save_load_round_trip_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dir = tempfile::tempdir().unwrap();
    for trial in 0..25 {
        let corpus = common::random_corpus(&mut rng, 1 + trial * 4, 40);
        let config = PipelineConfig::default().with_stemming(trial % 2 == 0);
        let index = Index::build(&corpus, &config, &FieldPolicy::default());
        let path = dir.path().join(format!("idx{trial}"));
        index.save(&path).unwrap();
        assert_eq!(Index::load(&path).unwrap(), index);

        let corpus_path = dir.path().join(format!("corpus{trial}.jsonl"));
        corpus.save(&corpus_path).unwrap();
        assert_eq!(Corpus::load(&corpus_path).unwrap(), corpus);
    }
}

#[test]
fn ten_thousand_term_round_trip() {
    let n_docs: DocId = 2_000;
    let doc_lens: BTreeMap<DocId, u32> = (1..=n_docs).map(|id| (id, 40)).collect();
    let lists: Vec<PostingList> = (0..10_000u64)
        .map(|t| {
            let postings: Vec<Posting> = (0..3)
                .map(|k| {
                    let doc_id = 1 + (t * 7 + k * 661) % n_docs;
                    (
                        doc_id,
                        Posting {
                            doc_id,
                            tf: 1 + (k as u32),
                            doc_len: 40,
                        },
                    )
                })
                .collect::<BTreeMap<DocId, Posting>>()
                .into_values()
                .collect();
            PostingList {
                term: format!("term{t:05}"),
                df: postings.len(),
                postings,
            }
        })
        .collect();
    let index = Index::from_parts(
        lists,
        doc_lens,
        PipelineConfig::default(),
        FieldPolicy::default(),
    )
    .unwrap();
    assert_eq!(index.stats().n_terms, 10_000);
    let dir = tempfile::tempdir().unwrap();
    index.save(dir.path()).unwrap();
    assert_eq!(Index::load(dir.path()).unwrap(), index);
}

fn arb_text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            "[a-zA-Z]{1,8}",
            Just("the".to_owned()),
            Just("\"quoted\"".to_owned()),
            Just("line\nbreak".to_owned()),
            Just("café".to_owned()),
            "[ -~]{1,6}",
        ],
        0..12,
    )
    .prop_map(|words| words.join(" "))
}

fn arb_corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::btree_map(
        1u64..100_000,
        (0usize..4, arb_text(), arb_text(), 0i64..4000),
        1..25,
    )
    .prop_map(|rows| {
        let docs = rows
            .into_iter()
            .map(|(id, (label, title, article, day))| Document {
                id,
                label: common::LABELS[label].to_owned(),
                url: format!("https://example.org/{id}?q=\"x\""),
                title: format!("T{id} {title}"),
                dt: common::date() - chrono::Duration::days(day),
                article,
            })
            .collect();
        Corpus::new(docs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corpus_jsonl_round_trip(corpus in arb_corpus()) {
        let mut buf = Vec::new();
        corpus.write_to(&mut buf).unwrap();
        let back = Corpus::from_reader(buf.as_slice()).unwrap();
        prop_assert_eq!(back.documents(), corpus.documents());
    }

    #[test]
    fn index_round_trip(corpus in arb_corpus(), stem in any::<bool>()) {
        let index = Index::build(&corpus, &PipelineConfig::default().with_stemming(stem), &FieldPolicy::default());
        let dir = tempfile::tempdir().unwrap();
        index.save(dir.path()).unwrap();
        prop_assert_eq!(Index::load(dir.path()).unwrap(), index);
    }
}
