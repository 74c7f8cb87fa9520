//! Replay the bundled reference run and compare with its published Q-values.

use std::path::Path;

use landscape::replay::ReplayFixture;
use landscape::session::{record_decision, run_iteration, SessionConfig};

fn main() -> landscape::Result<()> {
    let fx = ReplayFixture::load(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/reference_run.json"),
    )?;
    let mut state = fx.session("replay", SessionConfig::default())?;

    for (i, (aspect, validation)) in fx.aspects.iter().zip(fx.validations()).enumerate() {
        let rec = run_iteration(&mut state, Some(aspect), &validation)?;
        println!("iteration {} ({}):", rec.index, rec.validation_label);
        for d in &rec.q_updates {
            let published = fx.expected.q_after.get(i).and_then(|m| m.get(&d.label));
            println!(
                "  {:<4} {:>9.6} -> {:>9.6}   published {}",
                d.label,
                d.before,
                d.after,
                published.map_or("-".into(), |p| format!("{p:.6}"))
            );
        }
        record_decision(&mut state, i + 1 < fx.aspects.len(), None, "")?;
    }
    Ok(())
}
