//! Share of VAR estimates inside LP intervals across simulations, against the large-sample formula.
//!
//! cargo run --release --example var_outside_lp [reps]

use irflab::estimator::{EstimatorSpec, Inference, Method};
use irflab::mc::{Comparison, ExperimentConfig};
use irflab::theory::prob_var_outside_lp;
use irflab::{run_experiment, DgpSpec};

fn main() -> irflab::Result<()> {
    let reps = std::env::args().nth(1).map_or(500, |s| s.parse().expect("reps"));
    for alpha in [0.1, 0.3, 0.5] {
        let cfg = ExperimentConfig {
            dgp: DgpSpec::arma11(0.85, alpha, 1.0),
            t: 240,
            reps,
            horizon: 4,
            base_seed: 5,
            workers: None,
            truth: None,
            estimators: vec![
                EstimatorSpec::new("lp", Method::Lp, 1).with_inference(Inference::Analytic),
                EstimatorSpec::new("var", Method::Var, 1).with_inference(Inference::Analytic),
            ],
            comparisons: vec![Comparison {
                lp: "lp".into(),
                var: "var".into(),
            }],
        };
        let r = run_experiment(&cfg)?;
        let draws = |n: &str| r.estimates.iter().find(|(e, _)| e == n).unwrap().1.clone();
        let (lp, var) = (draws("lp"), draws("var"));
        for h in 1..=4 {
            let d: Vec<f64> = lp.iter().zip(&var).map(|(l, v)| v.as_ref().unwrap()[h] - l.as_ref().unwrap()[h]).collect();
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / d.len() as f64).sqrt();
            let ratio = r.cell("var", h).unwrap().sd / r.cell("lp", h).unwrap().sd;
            let c = r.comparison("lp", "var", h).unwrap();
            println!(
                "alpha={alpha} h={h} outside share {:.3} theory {:.3} (sqrtTM {:.2}, se ratio {ratio:.2}, median se ratio {:.2})",
                c.var_outside_lp_share.unwrap(),
                prob_var_outside_lp(mean.abs() / sd, ratio.min(1.0), 0.90)?,
                mean.abs() / sd,
                c.median_se_ratio.unwrap()
            );
        }
    }
    Ok(())
}
