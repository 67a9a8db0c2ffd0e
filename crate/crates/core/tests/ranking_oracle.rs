mod common;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentisearch_core::index::{FieldPolicy, Posting, PostingList};
use sentisearch_core::ranking::{self, bm25_score, bm25_term_weight, tfidf_score};
use sentisearch_core::text::PipelineConfig;
use sentisearch_core::{DocId, Index, Ranker, RankingParams};

fn random_query(rng: &mut impl Rng, vocab: usize) -> Vec<String> {
    (0..rng.gen_range(1..6))
        .map(|_| format!("w{}", rng.gen_range(0..vocab + 10)))
        .collect()
}

#[test]
fn bm25_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let vocab = rng.gen_range(5..120);
        let n_docs = rng.gen_range(2..80);
        let corpus = common::random_corpus(&mut rng, n_docs, vocab);
        let fields = FieldPolicy::default();
        let index = Index::build(&corpus, &PipelineConfig::default(), &fields);
        let tokens = common::doc_tokens(&corpus, &PipelineConfig::default(), &fields);
        let query = random_query(&mut rng, vocab);
        let params = RankingParams::new(rng.gen_range(0.0..3.0), rng.gen_range(0.0..=1.0)).unwrap();
        for &doc in tokens.keys() {
            let got = bm25_score(&query, doc, &index, params).unwrap();
            let want = common::oracle_bm25(&tokens, &query, doc, params.k1, params.b);
            assert!((got - want).abs() <= 1e-9, "doc {doc}: {got} vs {want}");
        }
    }
}

#[test]
fn tfidf_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let corpus = common::random_corpus(&mut rng, 60, 40);
    let fields = FieldPolicy::default();
    let index = Index::build(&corpus, &PipelineConfig::default(), &fields);
    let tokens = common::doc_tokens(&corpus, &PipelineConfig::default(), &fields);
    let n = tokens.len() as f64;
    for _ in 0..50 {
        let query = random_query(&mut rng, 40);
        let mut distinct = query.clone();
        distinct.sort();
        distinct.dedup();
        for (&doc, toks) in &tokens {
            let want: f64 = distinct
                .iter()
                .map(|q| {
                    let tf = toks.iter().filter(|t| *t == q).count() as f64;
                    let df = tokens.values().filter(|t| t.contains(q)).count() as f64;
                    if tf == 0.0 {
                        0.0
                    } else {
                        tf * (n / df).ln()
                    }
                })
                .sum();
            let got = tfidf_score(&query, doc, &index).unwrap();
            assert!((got - want).abs() <= 1e-9);
        }
    }
}

#[test]
fn rank_is_a_sorted_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let corpus = common::random_corpus(&mut rng, 50, 30);
        let index = Index::build(&corpus, &PipelineConfig::default(), &FieldPolicy::default());
        let query = random_query(&mut rng, 30);
        let mut candidates: Vec<DocId> = index.doc_lens().keys().copied().collect();
        candidates.shuffle(&mut rng);
        candidates.truncate(rng.gen_range(0..=candidates.len()));
        for ranker in [Ranker::Bm25, Ranker::TfIdf] {
            let ranked = ranking::rank(
                candidates.clone(),
                &query,
                &index,
                ranker,
                RankingParams::default(),
            )
            .unwrap();
            let mut expected: Vec<(f64, DocId)> = candidates
                .iter()
                .map(|&d| {
                    (
                        ranking::score(ranker, &query, d, &index, RankingParams::default())
                            .unwrap(),
                        d,
                    )
                })
                .collect();
            expected.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let got: Vec<(f64, DocId)> = ranked.iter().map(|s| (s.score, s.doc_id)).collect();
            assert_eq!(got, expected);
            let mut reversed = candidates.clone();
            reversed.reverse();
            assert_eq!(
                ranking::rank(reversed, &query, &index, ranker, RankingParams::default()).unwrap(),
                ranked
            );
        }
    }
}

#[test]
fn query_permutation_and_duplicates_do_not_change_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let corpus = common::random_corpus(&mut rng, 40, 25);
    let index = Index::build(&corpus, &PipelineConfig::default(), &FieldPolicy::default());
    for _ in 0..40 {
        let query = random_query(&mut rng, 25);
        let mut shuffled = query.clone();
        shuffled.shuffle(&mut rng);
        shuffled.push(query[0].clone());
        for &doc in index.doc_lens().keys() {
            let p = RankingParams::default();
            assert_eq!(
                bm25_score(&query, doc, &index, p).unwrap(),
                bm25_score(&shuffled, doc, &index, p).unwrap()
            );
        }
    }
}

#[test]
fn term_weight_monotone_in_tf_and_penalizes_length() {
    for &(k1, b) in &[(1.2, 0.75), (0.5, 1.0), (2.0, 0.3), (1.2, 0.0)] {
        let p = RankingParams::new(k1, b).unwrap();
        for avgdl in [3.0, 10.0, 57.5] {
            for dl in 1..60u32 {
                for tf in 1..dl.min(40) {
                    assert!(
                        bm25_term_weight(tf + 1, dl, avgdl, p) > bm25_term_weight(tf, dl, avgdl, p)
                    );
                }
                let w = bm25_term_weight(1, dl, avgdl, p);
                let longer = bm25_term_weight(1, dl + 1, avgdl, p);
                if b > 0.0 {
                    assert!(longer < w);
                } else {
                    assert_eq!(longer, w);
                }
            }
        }
    }
}

/// One term posted in three documents with equal tf and different lengths.
fn length_varied_index() -> Index {
    let doc_lens: BTreeMap<DocId, u32> = [(1, 4), (2, 10), (3, 25), (4, 7)].into_iter().collect();
    let postings = [1, 2, 3]
        .iter()
        .map(|&doc_id| Posting {
            doc_id,
            tf: 2,
            doc_len: doc_lens[&doc_id],
        })
        .collect();
    let list = PostingList {
        term: "jaguar".into(),
        df: 3,
        postings,
    };
    let filler = PostingList {
        term: "filler".into(),
        df: 1,
        postings: vec![Posting {
            doc_id: 4,
            tf: 1,
            doc_len: 7,
        }],
    };
    Index::from_parts(
        vec![list, filler],
        doc_lens,
        PipelineConfig::default(),
        FieldPolicy::default(),
    )
    .unwrap()
}

#[test]
fn zero_b_ignores_length_in_index() {
    let index = length_varied_index();
    let q = vec!["jaguar".to_owned()];
    let flat = RankingParams::new(1.2, 0.0).unwrap();
    let scores: Vec<f64> = [1, 2, 3]
        .iter()
        .map(|&d| bm25_score(&q, d, &index, flat).unwrap())
        .collect();
    assert!(scores[0] > 0.0);
    assert_eq!(scores[0], scores[1]);
    assert_eq!(scores[1], scores[2]);
    let default: Vec<f64> = [1, 2, 3]
        .iter()
        .map(|&d| bm25_score(&q, d, &index, RankingParams::default()).unwrap())
        .collect();
    assert!(default[0] > default[1] && default[1] > default[2]);
}

#[test]
fn unknown_docs_are_errors() {
    let index = length_varied_index();
    let q = vec!["jaguar".to_owned()];
    assert!(bm25_score(&q, 99, &index, RankingParams::default()).is_err());
    assert!(tfidf_score(&q, 99, &index).is_err());
    assert!(ranking::rank([1, 99], &q, &index, Ranker::Bm25, RankingParams::default()).is_err());
}
