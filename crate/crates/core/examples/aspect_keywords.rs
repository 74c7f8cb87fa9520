//! Rank aspect keywords by tf-idf over a handful of documents.

use std::path::Path;

use landscape::aspect::{
    compute_tfidf, extract_aspect_keywords, ExclusionList, ExtractOptions, NormalizeMode,
};
use landscape::corpus::{load_corpus, CorpusFormat, PreprocessConfig};

fn main() -> landscape::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let docs = load_corpus(&dir.join("aspect_protocols.jsonl"), CorpusFormat::Jsonl)?
        .preprocess(&PreprocessConfig::default())?;

    let scores = compute_tfidf(&docs)?;
    println!("{} distinct stems scored", scores.len());

    let exclusions = ExclusionList::load(&dir.join("exclusions.txt"))?;
    let opts = ExtractOptions {
        label: "protocols".into(),
        max_k: 12,
        ..Default::default()
    };
    let aspect =
        extract_aspect_keywords(&docs, &opts, &exclusions)?.normalize(NormalizeMode::MaxOne)?;
    for (term, w) in aspect.entries() {
        println!("{term:<16} {w:.3}");
    }
    Ok(())
}
