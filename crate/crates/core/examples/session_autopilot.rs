//! Drive a whole session on the mini corpus, save it and load it back.

use std::path::Path;

use landscape::aspect::{extract_aspect_keywords, ExclusionList, ExtractOptions};
use landscape::corpus::{load_corpus, Corpus, CorpusFormat, PreprocessConfig};
use landscape::session::{
    autopilot, create_session, load_session, save_session, SessionConfig, Validation,
};
use landscape::topics::LdaParams;

fn read(dir: &Path, name: &str) -> landscape::Result<Corpus> {
    load_corpus(&dir.join(name), CorpusFormat::Jsonl)?.preprocess(&PreprocessConfig::default())
}

fn main() -> landscape::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let corpus = read(&dir, "corpus.jsonl")?;
    let lda = LdaParams {
        k: 8,
        iterations: 200,
        seed: 11,
        ..Default::default()
    };
    let mut state = create_session(
        "demo",
        "mini",
        &corpus,
        &lda,
        None,
        SessionConfig::default(),
    )?;

    let exclusions = ExclusionList::load(&dir.join("exclusions.txt"))?;
    let mut aspects = Vec::new();
    for (file, label) in [
        ("aspect_protocols.jsonl", "protocols"),
        ("aspect_networks.jsonl", "networks"),
    ] {
        let opts = ExtractOptions {
            label: label.into(),
            max_k: 25,
            ..Default::default()
        };
        aspects.push(extract_aspect_keywords(
            &read(&dir, file)?,
            &opts,
            &exclusions,
        )?);
    }
    let validations = [
        Validation::documents("2023", read(&dir, "validation_2023.jsonl")?),
        Validation::documents("2024", read(&dir, "validation_2024.jsonl")?),
    ];
    autopilot(&mut state, &aspects, &validations, 10, 0.0)?;

    for rec in &state.iterations {
        println!(
            "iteration {} ({} on {}): selected {}",
            rec.index,
            rec.aspect_label,
            rec.validation_label,
            rec.selected_topics.join(", ")
        );
    }
    let out = std::env::temp_dir().join("landscape-demo-session");
    save_session(&state, &out)?;
    let back = load_session(&out)?;
    assert_eq!(back.qtable, state.qtable);
    println!(
        "saved to {} and reloaded; status {}",
        out.display(),
        back.status
    );
    Ok(())
}
