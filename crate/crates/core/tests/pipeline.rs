mod common;

use common::*;
use landscape::reports::{build_report, ReportKind, ReportRequest, Table};
use landscape::session::{load_session, save_session, Status};

#[test]
fn mini_run_selects_five_per_iteration() {
    let s = mini_run();
    assert_eq!(s.status, Status::Ended);
    assert_eq!(s.iterations.len(), 2);
    for rec in &s.iterations {
        assert_eq!(rec.selected_topics.len(), 5);
        assert_eq!(rec.q_updates.len(), 5);
        assert_eq!(rec.doc_matrix.as_ref().unwrap().num_docs(), 16);
    }
    assert_eq!(s.iterations[1].aspect_label, "networks");
    assert!(s.iterations[1].novelty_flag);
    assert_eq!(s.lineage_chain(), ["CTP2", "CTP1"]);
}

#[test]
fn session_directories_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    save_session(&mini_run(), a.path()).unwrap();
    save_session(&mini_run(), b.path()).unwrap();
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert_eq!(sa.len(), sb.len());
    for ((pa, ba), (pb, bb)) in sa.iter().zip(&sb) {
        assert_eq!(pa, pb);
        assert!(ba == bb, "{pa} differs");
    }
    assert!(sa.iter().any(|(p, _)| p == "matrices/2_docsim.csv"));
}

#[test]
fn saved_session_reports_match_in_memory() {
    let s = mini_run();
    let dir = tempfile::tempdir().unwrap();
    save_session(&s, dir.path()).unwrap();
    let loaded = load_session(dir.path()).unwrap();
    assert_eq!(loaded, s);
    for kind in [
        ReportKind::ModelHeatmap,
        ReportKind::ComparisonBundle,
        ReportKind::QReport,
        ReportKind::DocMatrix,
        ReportKind::Sweep,
    ] {
        let req = ReportRequest::new(kind);
        let csv = build_report(&loaded, &req, None).unwrap().to_csv().unwrap();
        assert_eq!(
            csv,
            build_report(&s, &req, None).unwrap().to_csv().unwrap(),
            "{kind:?}"
        );
        let json = build_report(
            &s,
            &ReportRequest {
                format: landscape::reports::Format::Json,
                ..req
            },
            None,
        )
        .unwrap()
        .to_json()
        .unwrap();
        assert_eq!(
            Table::from_csv(&csv).unwrap(),
            Table::from_json(&json).unwrap(),
            "{kind:?}"
        );
    }
}

#[test]
fn keyword_comparison_on_selected_topics() {
    let s = mini_run();
    let mut req = ReportRequest::new(ReportKind::KeywordComparison);
    req.iterations = Some((1, 1));
    assert!(build_report(&s, &req, None).is_err());
    let docs = preprocessed("mini/validation_2023.jsonl");
    let t = build_report(&s, &req, Some(&docs)).unwrap();
    assert_eq!(t.columns, ["term", "model_weight", "document_weight"]);
    assert!(!t.rows.is_empty());
}
