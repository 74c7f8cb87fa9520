//! The Q-update and a small alpha / lambda sweep.

use landscape::agent::{modified_reward, parameter_sweep, q_update, SweepInputs};

fn main() -> landscape::Result<()> {
    let (alpha, gamma) = (0.1, 0.9);
    let mut q = 1.0;
    for step in 1..=5 {
        let r = modified_reward(0.4, 1.2, 0.5);
        q = q_update(q, r, 1.5, alpha, gamma)?;
        println!("step {step}: reward {r:.3}, q {q:.6}");
    }

    let inputs = SweepInputs {
        labels: vec!["T1".into(), "T2".into(), "T3".into()],
        q_before: vec![1.2, 0.8, 1.0],
        base_rewards: vec![0.5, 0.1, 0.3],
        entropy_new: vec![1.1, 2.3, 1.7],
        max_future_q: vec![0.5, 0.5, 0.5],
        gamma,
        top_n: 2,
    };
    let report = parameter_sweep(&inputs, &[0.1, 0.2, 0.3], &[0.5, 2.5, 4.5])?;
    let header: Vec<String> = report
        .pairs
        .iter()
        .map(|&(a, l)| format!("({a}, {l})"))
        .collect();
    println!("\n      {}", header.join(" "));
    for (t, label) in report.labels.iter().enumerate() {
        let cells: Vec<String> = report.q_after[t]
            .iter()
            .enumerate()
            .map(|(p, v)| {
                if report.is_selected(t, p) {
                    format!("{v:>10.4}")
                } else {
                    format!("{:>10}", "-")
                }
            })
            .collect();
        println!("{label:<5} {}", cells.join(" "));
    }
    Ok(())
}
