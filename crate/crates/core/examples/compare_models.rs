//! Reweight a model by an aspect and measure how each topic moved.

use std::sync::Arc;

use landscape::aspect::AspectKeywords;
use landscape::corpus::Vocabulary;
use landscape::metrics::{adns, compare_models, cosine_similarity, entropy};
use landscape::topics::{ApplyAspectOptions, ModelKind, TopicModel};

fn main() -> landscape::Result<()> {
    let vocab = Arc::new(Vocabulary::from_terms([
        "entangl", "key", "memori", "protocol", "repeat", "secur",
    ]));
    let rows = vec![
        vec![0.05, 0.40, 0.05, 0.30, 0.05, 0.15],
        vec![0.30, 0.05, 0.30, 0.05, 0.25, 0.05],
    ];
    let old = TopicModel::new(
        "CTP1",
        ModelKind::Initial,
        rows,
        vec!["keys".into(), "repeaters".into()],
        vocab,
        None,
    )?;
    let aspect = AspectKeywords::new(
        "security",
        vec![
            ("secur".into(), 1.0),
            ("key".into(), 0.6),
            ("protocol".into(), 0.4),
        ],
    )?;
    let new = old.apply_aspect(&aspect, &ApplyAspectOptions::default())?;

    let b = compare_models(&old, &new)?;
    println!(
        "{:<10} {:>8} {:>8} {:>8} {:>8}",
        "topic", "sim", "mag", "d_ent", "adns"
    );
    for (i, l) in b.labels.iter().enumerate() {
        println!(
            "{l:<10} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            b.corresponding_similarity[i], b.magnitude[i], b.entropy_delta[i], b.adns[i]
        );
    }

    // The same numbers from the primitives.
    let (a, n) = (old.row(0), new.row(0));
    println!(
        "\ncosine {:.4}, entropy {:.4} -> {:.4}, adns {:.4}",
        cosine_similarity(a, n).value,
        entropy(a)?,
        entropy(n)?,
        adns(a, n)?
    );
    Ok(())
}
