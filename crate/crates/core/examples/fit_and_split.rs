//! Fit LDA on the mini corpus, then refine it into subtopics.

use std::path::Path;

use landscape::corpus::{load_corpus, CorpusFormat, PreprocessConfig};
use landscape::topics::{fit_lda, split_topics, LdaParams};

fn main() -> landscape::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini/corpus.jsonl");
    let corpus =
        load_corpus(&path, CorpusFormat::Jsonl)?.preprocess(&PreprocessConfig::default())?;

    let params = LdaParams {
        k: 4,
        iterations: 200,
        seed: 7,
        ..Default::default()
    };
    let (model, assignment) = fit_lda(&corpus, &params)?;
    for (t, label) in model.labels().iter().enumerate() {
        let words: Vec<_> = model.top_words(t, 6).into_iter().map(|(w, _)| w).collect();
        println!("{label}: {}", words.join(" "));
    }

    let sub = LdaParams {
        iterations: 100,
        ..Default::default()
    };
    let split = split_topics(&model, &assignment, &corpus, 8, &sub, params.seed)?;
    println!("\nsplit into {} subtopics", split.num_topics());
    for (t, label) in split.labels().iter().enumerate() {
        let words: Vec<_> = split.top_words(t, 4).into_iter().map(|(w, _)| w).collect();
        println!("{label}: {}", words.join(" "));
    }
    Ok(())
}
