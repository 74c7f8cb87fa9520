use std::path::PathBuf;

use landscape::replay::ReplayFixture;
use landscape::session::{autopilot, RewardSource, SessionConfig, Status};

fn fixture() -> ReplayFixture {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/reference_run.json");
    ReplayFixture::load(&p).unwrap()
}

#[test]
fn trajectory_matches_published_values() {
    let fx = fixture();
    let mut s = fx.session("ref", SessionConfig::default()).unwrap();
    autopilot(&mut s, &fx.aspects, &fx.validations(), 10, 0.0).unwrap();
    assert_eq!(s.status, Status::Ended);
    assert_eq!(s.iterations.len(), 2);
    for (rec, expected) in s.iterations.iter().zip(&fx.expected.q_after) {
        assert_eq!(rec.reward_source, RewardSource::Published);
        assert_eq!(rec.q_updates.len(), 5);
        for (label, &q) in expected {
            let got = rec.q_update(label).unwrap().after;
            assert!((got - q).abs() < 1e-4, "{label}: {got} vs {q}");
        }
    }
    let last = s.last_iteration().unwrap();
    for (label, &d) in &fx.expected.deltas {
        let got = last.q_update(label).unwrap().delta();
        assert!((got - d).abs() < 1e-3, "{label}: {got} vs {d}");
    }
}

#[test]
fn lineage_follows_iterations() {
    let fx = fixture();
    let mut s = fx.session("ref", SessionConfig::default()).unwrap();
    autopilot(&mut s, &fx.aspects, &fx.validations(), 10, 0.0).unwrap();
    assert_eq!(s.models["CTP3"].lineage().unwrap().parent, "CTP2");
    assert_eq!(
        s.models["CTP3"].lineage().unwrap().aspect_label,
        "aspect-2-challenges"
    );
}

#[test]
fn published_top_words() {
    let fx = fixture();
    let ctp2 = fx.published_model("CTP2").unwrap();
    let t34 = ctp2.label_index("T34").unwrap();
    let words: Vec<String> = ctp2
        .top_words(t34, 10)
        .into_iter()
        .map(|(w, _)| w)
        .collect();
    assert_eq!(&words[..4], ["key", "protocol", "secur", "distribut"]);
    assert_eq!(words.len(), 10);
}
