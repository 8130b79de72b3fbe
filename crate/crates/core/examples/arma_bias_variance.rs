//! The bias/variance trade-off between LP(1) and VAR(1) on an ARMA(1,1) process.
//!
//! cargo run --release --example arma_bias_variance [reps]

use irflab::estimator::{EstimatorSpec, Method};
use irflab::mc::ExperimentConfig;
use irflab::theory::var_bias_arma1;
use irflab::{run_experiment, DgpSpec};

fn main() -> irflab::Result<()> {
    let reps = std::env::args().nth(1).map_or(500, |s| s.parse().expect("reps"));
    let cfg = ExperimentConfig {
        dgp: DgpSpec::arma11(0.85, 0.1, 1.0),
        t: 240,
        reps,
        horizon: 8,
        base_seed: 1,
        workers: None,
        truth: None,
        estimators: vec![
            EstimatorSpec::new("lp1", Method::Lp, 1),
            EstimatorSpec::new("var1", Method::Var, 1),
        ],
        comparisons: vec![],
    };
    let report = run_experiment(&cfg)?;
    println!(" h   truth   lp bias   lp sd  var bias  var sd  b_h(1)");
    for h in 1..=8 {
        let (lp, var) = (report.cell("lp1", h).unwrap(), report.cell("var1", h).unwrap());
        println!(
            "{h:2} {:7.4} {:9.4} {:7.4} {:9.4} {:7.4} {:7.4}",
            lp.truth,
            lp.bias,
            lp.sd,
            var.bias,
            var.sd,
            var_bias_arma1(0.85, 0.1, h)?
        );
    }
    Ok(())
}
