//! Longer VAR lags trade bias for variance; LP barely moves.
//!
//! cargo run --release --example lag_length_tradeoff [reps]

use irflab::estimator::{EstimatorSpec, Method};
use irflab::mc::{sweep, ExperimentConfig};
use irflab::DgpSpec;

fn main() -> irflab::Result<()> {
    let reps = std::env::args().nth(1).map_or(300, |s| s.parse().expect("reps"));
    let mut estimators = Vec::new();
    for p in [1, 4, 8] {
        estimators.push(EstimatorSpec::new(&format!("lp{p}"), Method::Lp, p));
        estimators.push(EstimatorSpec::new(&format!("var{p}"), Method::Var, p));
    }
    let config = |alpha: f64| ExperimentConfig {
        dgp: DgpSpec::arma11(0.85, alpha, 1.0),
        t: 240,
        reps,
        horizon: 6,
        base_seed: 2,
        workers: None,
        truth: None,
        estimators: estimators.clone(),
        comparisons: vec![],
    };
    let report = sweep(&[("alpha=0.1".into(), config(0.1)), ("alpha=0.2".into(), config(0.2))])?;
    for (label, r) in &report.groups {
        println!("{label}");
        for e in &estimators {
            let row: Vec<String> = (1..=6)
                .map(|h| {
                    let c = r.cell(&e.name, h).unwrap();
                    format!("{:+.3}/{:.3}", c.bias, c.sd)
                })
                .collect();
            println!("  {:5} bias/sd h=1..6: {}", e.name, row.join(" "));
        }
    }
    println!("median |bias| across the two DGPs at h=2:");
    for m in report.medians.iter().filter(|m| m.horizon == 2) {
        println!("  {:5} {:.4}", m.estimator, m.median_abs_bias);
    }
    Ok(())
}
