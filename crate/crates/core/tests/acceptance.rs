//! One line per acceptance criterion. Run with `cargo test --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::oracle;
use landscape::agent::{approximate_reward, parameter_sweep, q_update, RewardCoefficients};
use landscape::aspect::{extract_aspect_keywords, ExclusionList, ExtractOptions};
use landscape::corpus::Corpus;
use landscape::metrics::{adns, cosine_similarity, entropy, LogBase, MetricsBundle};
use landscape::replay::ReplayFixture;
use landscape::reports::{export_sweep, Cell};
use landscape::session::{autopilot, save_session, SessionConfig};
use landscape::topics::{fit_lda, LdaParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q_update_golden() -> Check {
    let rows = [
        (0.817206, 2.94253, 0.592063, 2.783283),
        (2.003339, 2.329936, 0.592063, 2.350562),
        (2.806429, 1.675343, 0.592063, 1.841738),
        (2.636102, 1.64776, 0.592063, 1.79988),
        (2.936999, 1.564563, 0.592063, 1.755092),
        (0.740486, 2.783283, 0.585846, 2.63173),
        (2.507128, 1.79988, 0.585846, 1.923331),
        (2.801841, 2.350562, 0.585846, 2.448416),
        (3.024117, 1.755092, 0.585846, 1.934721),
        (2.983367, 1.841738, 0.585846, 2.008627),
    ];
    let mut worst: f64 = 0.0;
    for (r, q, m, expected) in rows {
        let got = q_update(q, r, m, 0.1, 0.9).map_err(|e| e.to_string())?;
        worst = worst.max((got - expected).abs());
    }
    ensure(worst < 1e-4, || format!("max error {worst:e}"))?;
    Ok(format!("10 rows, max error {worst:.1e}"))
}

fn published_trajectory() -> Check {
    let fx = ReplayFixture::load(&common::fixtures().join("reference_run.json"))
        .map_err(|e| e.to_string())?;
    let mut s = fx
        .session("acceptance", SessionConfig::default())
        .map_err(|e| e.to_string())?;
    autopilot(&mut s, &fx.aspects, &fx.validations(), 10, 0.0).map_err(|e| e.to_string())?;
    let last = s.last_iteration().ok_or("no iterations")?;
    let mut parts = Vec::new();
    for label in ["T19", "T32", "T39", "T21", "T33"] {
        let expected = fx.expected.deltas[label];
        let got = last
            .q_update(label)
            .ok_or(format!("{label} not updated"))?
            .delta();
        ensure((got - expected).abs() < 1e-3, || {
            format!("{label}: {got:.4} vs {expected}")
        })?;
        parts.push(format!("{label} {got:+.3}"));
    }
    Ok(parts.join(", "))
}

fn metric_properties() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n_cases = 2000;
    for case in 0..n_cases {
        let n = rng.gen_range(1..50);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let s = rng.gen_range(0.01..100.0);
        let scaled: Vec<f64> = a.iter().map(|x| x * s).collect();
        let (ab, ba) = (
            cosine_similarity(&a, &b).value,
            cosine_similarity(&b, &a).value,
        );
        ensure((ab - ba).abs() < 1e-12, || {
            format!("case {case}: cosine asymmetric")
        })?;
        ensure((-1.0..=1.0).contains(&ab), || {
            format!("case {case}: cosine {ab}")
        })?;
        ensure(
            (cosine_similarity(&scaled, &b).value - ab).abs() < 1e-9,
            || format!("case {case}: scale"),
        )?;
        let uniform = entropy(&vec![s; n]).unwrap();
        ensure((uniform - (n as f64).ln()).abs() < 1e-9, || {
            format!("case {case}: uniform entropy {uniform}")
        })?;
        let mut point = vec![0.0; n];
        point[rng.gen_range(0..n)] = s;
        ensure(entropy(&point).unwrap() == 0.0, || {
            format!("case {case}: point mass")
        })?;
        if a.iter().sum::<f64>() > 0.0 && b.iter().sum::<f64>() > 0.0 {
            let d = adns(&a, &b).unwrap();
            ensure((0.0..=2.0 + 1e-12).contains(&d), || {
                format!("case {case}: adns {d}")
            })?;
            ensure(adns(&a, &scaled).unwrap() < 1e-12, || {
                format!("case {case}: adns identity")
            })?;
        }
        if n >= 2 {
            let k = rng.gen_range(1..n);
            let x: Vec<f64> = (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
            let y: Vec<f64> = (0..n).map(|i| if i < k { 0.0 } else { 2.0 }).collect();
            ensure((adns(&x, &y).unwrap() - 2.0).abs() < 1e-12, || {
                format!("case {case}: disjoint adns")
            })?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{n_cases} random cases in {secs:.2}s"))
}

fn reward_linearity() -> Check {
    let c = RewardCoefficients::default();
    let base = [1.3, 0.4, -0.2, 0.7];
    let make = |f: [f64; 4]| MetricsBundle {
        labels: vec!["T01".into()],
        similarity_matrix: vec![vec![f[1]]],
        corresponding_similarity: vec![f[1]],
        magnitude: vec![f[0]],
        adns: vec![f[3]],
        entropy_old: vec![1.0],
        entropy_new: vec![1.0 + f[2]],
        entropy_delta: vec![f[2]],
        degenerate: vec![false],
        log_base: LogBase::Natural,
    };
    let r0 = approximate_reward(&make(base), 0, &c);
    let lambdas = [c.lambda1, c.lambda2, c.lambda3, c.lambda4];
    let h = 1e-3;
    let mut slopes = Vec::new();
    for i in 0..4 {
        let mut f = base;
        f[i] += h;
        let slope = (approximate_reward(&make(f), 0, &c) - r0) / h;
        ensure((slope - lambdas[i]).abs() < 1e-9, || {
            format!("field {i}: slope {slope} vs {}", lambdas[i])
        })?;
        slopes.push(format!("{slope:.6}"));
    }
    Ok(format!("slopes {}", slopes.join(", ")))
}

fn tfidf_oracle() -> Check {
    let mut checked = 0;
    for rel in [
        "tfidf_three.jsonl",
        "tfidf_ties.jsonl",
        "mini/aspect_protocols.jsonl",
        "mini/aspect_networks.jsonl",
    ] {
        let corpus: Corpus = common::preprocessed(rel);
        if corpus.len() > 10 {
            continue;
        }
        let opts = ExtractOptions {
            max_k: usize::MAX,
            ..Default::default()
        };
        let got: Vec<String> = extract_aspect_keywords(&corpus, &opts, &ExclusionList::default())
            .map_err(|e| format!("{rel}: {e}"))?
            .entries()
            .iter()
            .map(|(t, _)| t.clone())
            .collect();
        let expected = oracle::ranking(oracle::tfidf(corpus.tokens()), usize::MAX);
        ensure(got == expected, || format!("{rel}: rankings differ"))?;
        checked += 1;
    }
    Ok(format!("{checked} fixture corpora"))
}

fn lda_recovery() -> Check {
    let start = Instant::now();
    let (truth, docs) = oracle::synthetic_lda(3);
    let corpus = Corpus::from_tokens(&docs);
    let params = LdaParams {
        k: 3,
        alpha: Some(0.3),
        beta: 0.01,
        iterations: 300,
        seed: 5,
    };
    let (model, _) = fit_lda(&corpus, &params).map_err(|e| e.to_string())?;
    let scores = oracle::greedy_match(&truth, model.rows());
    let secs = start.elapsed().as_secs_f64();
    ensure(scores.iter().all(|&s| s >= 0.9), || {
        format!("matched cosines {scores:?}")
    })?;
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "matched cosines {:.3}/{:.3}/{:.3} in {secs:.1}s",
        scores[0], scores[1], scores[2]
    ))
}

fn end_to_end_determinism() -> Check {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (s1, s2) = (common::mini_run(), common::mini_run());
    for s in [&s1, &s2] {
        for rec in &s.iterations {
            ensure(rec.selected_topics.len() == 5, || {
                format!(
                    "iteration {} selected {}",
                    rec.index,
                    rec.selected_topics.len()
                )
            })?;
        }
        ensure(s.iterations.len() == 2, || {
            format!("{} iterations", s.iterations.len())
        })?;
    }
    save_session(&s1, a.path()).map_err(|e| e.to_string())?;
    save_session(&s2, b.path()).map_err(|e| e.to_string())?;
    let (x, y) = (common::snapshot(a.path()), common::snapshot(b.path()));
    ensure(x == y, || "session directories differ".into())?;
    Ok(format!(
        "{} files identical, 5 topics selected in each of 2 iterations",
        x.len()
    ))
}

fn sweep_monotonicity() -> Check {
    let s = common::mini_run();
    let mut topics_checked = 0;
    for rec in &s.iterations {
        let inputs = rec
            .sweep_inputs(&s.config.agent)
            .map_err(|e| e.to_string())?;
        let alphas = [0.1, 0.15, 0.2, 0.25, 0.3];
        let lambdas = [0.5, 1.5, 2.5, 3.5, 4.5];
        let report = parameter_sweep(&inputs, &alphas, &lambdas).map_err(|e| e.to_string())?;
        for t in 0..inputs.labels.len() {
            if inputs.entropy_new[t] <= 0.0 {
                continue;
            }
            topics_checked += 1;
            for a in 0..alphas.len() {
                for l in 1..lambdas.len() {
                    let (lo, hi) = (
                        report.q_after[t][a * 5 + l - 1],
                        report.q_after[t][a * 5 + l],
                    );
                    ensure(hi > lo, || {
                        format!("{} not increasing at alpha {}", inputs.labels[t], alphas[a])
                    })?;
                }
            }
        }
        let table = export_sweep(&report);
        ensure(table.columns.len() == 26, || {
            format!("{} columns", table.columns.len())
        })?;
        ensure(table.rows.len() == inputs.labels.len(), || {
            "row count".into()
        })?;
        for col in 1..26 {
            let filled = table.rows.iter().filter(|r| r[col] != Cell::Empty).count();
            ensure(filled == 5, || {
                format!("column {} has {filled} values", table.columns[col])
            })?;
        }
    }
    Ok(format!(
        "{topics_checked} topic rows over 2 iterations, 8 x 25 tables with 5 values per column"
    ))
}

fn main() {
    let checks: [(&str, fn() -> Check); 8] = [
        ("q-update golden values", q_update_golden),
        ("published Q trajectory", published_trajectory),
        ("metric properties", metric_properties),
        ("approximate reward linearity", reward_linearity),
        ("tf-idf oracle equivalence", tfidf_oracle),
        ("lda recovery", lda_recovery),
        ("end-to-end determinism", end_to_end_determinism),
        ("sweep monotonicity", sweep_monotonicity),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        checks.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
