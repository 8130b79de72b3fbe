//! LP percentile-t and VAR Efron bootstrap intervals on one simulated sample.
//!
//! cargo run --release --example bootstrap_intervals

use irflab::estimator::{EstimatorSpec, Inference, Method};
use irflab::var::Identification;
use irflab::{simulate, BootConfig, DgpSpec};

fn main() -> irflab::Result<()> {
    let data = simulate(&DgpSpec::arma11(0.85, 0.1, 1.0), 240, 3)?;
    let ident = Identification::Recursive {
        impulse: "y".into(),
        outcome: "y".into(),
        ordering: None,
    };
    let cols = vec!["y".to_string()];
    let boot = BootConfig::new(500, 0.90, 11);
    let specs = [
        EstimatorSpec::new("lp_ehw", Method::Lp, 4).with_inference(Inference::Analytic),
        EstimatorSpec::new("lp_boot", Method::Lp, 4).with_boot(boot),
        EstimatorSpec::new("var_delta", Method::Var, 4).with_inference(Inference::Analytic),
        EstimatorSpec::new("var_efron", Method::Var, 4).with_boot(boot),
    ];
    let truth = DgpSpec::arma11(0.85, 0.1, 1.0).true_irf("y", 8)?.values;
    for spec in specs {
        let irf = spec.with_identification(ident.clone(), &cols).estimate(&data, 8, None)?;
        println!("{}", irf.method);
        for h in 0..=8 {
            let (lo, hi) = (irf.ci_lo.as_ref().unwrap()[h], irf.ci_hi.as_ref().unwrap()[h]);
            println!("  h={h} {:+.3} [{lo:+.3}, {hi:+.3}] truth {:+.3}", irf.theta[h], truth[h]);
        }
    }
    Ok(())
}
