mod common;

use common::oracle;
use landscape::corpus::Corpus;
use landscape::topics::{fit_lda, LdaParams};

#[test]
fn recovers_planted_topics() {
    let (truth, docs) = oracle::synthetic_lda(3);
    let corpus = Corpus::from_tokens(&docs);
    let params = LdaParams {
        k: 3,
        alpha: Some(0.3),
        beta: 0.01,
        iterations: 300,
        seed: 5,
    };
    let (model, assignment) = fit_lda(&corpus, &params).unwrap();
    assert_eq!(assignment.doc_topic.len(), 500);
    // vocabulary is w00..w29 in order, matching the generator's columns
    let scores = oracle::greedy_match(&truth, model.rows());
    assert!(scores.iter().all(|&s| s >= 0.9), "{scores:?}");
}

#[test]
fn same_seed_same_model() {
    let (_, docs) = oracle::synthetic_lda(4);
    let corpus = Corpus::from_tokens(&docs[..100]);
    let params = LdaParams {
        k: 3,
        iterations: 40,
        seed: 9,
        ..Default::default()
    };
    let (a, _) = fit_lda(&corpus, &params).unwrap();
    let (b, _) = fit_lda(&corpus, &params).unwrap();
    assert_eq!(a, b);
    let (c, _) = fit_lda(&corpus, &LdaParams { seed: 10, ..params }).unwrap();
    assert_ne!(a.rows(), c.rows());
}
