//! Load a corpus and narrow it with a boolean query.
//!
//! cargo run -p landscape-core --example ingest_query -- "quantum AND (repeat* OR network)"

use std::path::Path;

use landscape::corpus::{load_corpus, CorpusFormat, SearchQuery};

fn main() -> landscape::Result<()> {
    let q = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "quantum AND (repeat* OR \"key distribution\")".into());
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini/corpus.jsonl");
    let corpus = load_corpus(&path, CorpusFormat::Jsonl)?;
    let query = SearchQuery::parse(&q)?;

    let matched = corpus.filter_by_query(&query);
    println!("{} of {} documents match {q}", matched.len(), corpus.len());
    for min_hits in 1..=3 {
        println!(
            "  with >= {min_hits} distinct terms: {}",
            corpus.relevance_filter(&query, min_hits).len()
        );
    }
    for d in matched.documents().iter().take(5) {
        println!("  {}  {}", d.id, d.title);
    }
    Ok(())
}
