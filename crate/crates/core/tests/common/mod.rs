#![allow(dead_code)]

use std::path::{Path, PathBuf};

use landscape::aspect::{extract_aspect_keywords, AspectKeywords, ExclusionList, ExtractOptions};
use landscape::corpus::{load_corpus, Corpus, CorpusFormat, PreprocessConfig};
use landscape::session::{autopilot, create_session, SessionConfig, SessionState, Validation};
use landscape::topics::LdaParams;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn load(rel: &str) -> Corpus {
    let p = fixtures().join(rel);
    load_corpus(&p, CorpusFormat::from_path(&p)).unwrap()
}

pub fn preprocessed(rel: &str) -> Corpus {
    load(rel).preprocess(&PreprocessConfig::default()).unwrap()
}

pub fn mini_aspect(rel: &str, label: &str) -> AspectKeywords {
    let exclusions = ExclusionList::load(&fixtures().join("mini/exclusions.txt")).unwrap();
    let opts = ExtractOptions {
        label: label.into(),
        max_k: 25,
        ..Default::default()
    };
    extract_aspect_keywords(&preprocessed(rel), &opts, &exclusions).unwrap()
}

pub fn mini_lda() -> LdaParams {
    LdaParams {
        k: 8,
        iterations: 200,
        seed: 11,
        ..Default::default()
    }
}

/// Fit on the mini corpus and run both aspects through autopilot.
pub fn mini_run() -> SessionState {
    let corpus = preprocessed("mini/corpus.jsonl");
    let mut s = create_session(
        "mini",
        "mini/corpus.jsonl",
        &corpus,
        &mini_lda(),
        None,
        SessionConfig::default(),
    )
    .unwrap();
    let aspects = [
        mini_aspect("mini/aspect_protocols.jsonl", "protocols"),
        mini_aspect("mini/aspect_networks.jsonl", "networks"),
    ];
    let validations = [
        Validation::documents("2023", preprocessed("mini/validation_2023.jsonl")),
        Validation::documents("2024", preprocessed("mini/validation_2024.jsonl")),
    ];
    autopilot(&mut s, &aspects, &validations, 10, 0.0).unwrap();
    s
}

/// Every file under `dir` with its bytes; `manifest.json` has its timestamp line removed.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
                continue;
            }
            let rel = p
                .strip_prefix(dir)
                .unwrap()
                .to_string_lossy()
                .replace('\\', "/");
            let mut bytes = std::fs::read(&p).unwrap();
            if rel == "manifest.json" {
                let text = String::from_utf8(bytes).unwrap();
                bytes = text
                    .lines()
                    .filter(|l| !l.trim_start().starts_with("\"created_at\""))
                    .collect::<Vec<_>>()
                    .join("\n")
                    .into_bytes();
            }
            out.push((rel, bytes));
        }
    }
    out.sort();
    out
}

pub mod oracle;
