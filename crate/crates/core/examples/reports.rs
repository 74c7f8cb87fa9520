//! Tables from a replayed session, as CSV and JSON.

use std::path::Path;

use landscape::replay::ReplayFixture;
use landscape::reports::{build_report, Format, ReportKind, ReportRequest};
use landscape::session::{autopilot, SessionConfig};

fn main() -> landscape::Result<()> {
    let fx = ReplayFixture::load(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/reference_run.json"),
    )?;
    let mut state = fx.session("reports", SessionConfig::default())?;
    autopilot(&mut state, &fx.aspects, &fx.validations(), 10, 0.0)?;

    let q = build_report(&state, &ReportRequest::new(ReportKind::QReport), None)?;
    println!("{}", q.render(Format::Csv)?);

    let mut req = ReportRequest::new(ReportKind::ModelHeatmap);
    req.top_words = 3;
    req.iterations = Some((1, 1));
    println!("{}", build_report(&state, &req, None)?.render(Format::Csv)?);

    let mut req = ReportRequest::new(ReportKind::ComparisonBundle);
    req.format = Format::Json;
    let json = build_report(&state, &req, None)?.render(Format::Json)?;
    println!("{}...", &json[..json.len().min(200)]);
    Ok(())
}
