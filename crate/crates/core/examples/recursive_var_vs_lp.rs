//! Recursive identification in a bivariate VAR: LP and VAR agree on impact and diverge later.
//!
//! cargo run --release --example recursive_var_vs_lp

use irflab::estimator::{disagreement, EstimateConfig};
use irflab::{simulate, DgpSpec};

fn main() -> irflab::Result<()> {
    let dgp: DgpSpec = serde_json::from_str(
        r#"{"kind": "varma", "A": [[[0.5, 0.1], [0.2, 0.4]]], "Theta": [[[0.3, 0.0], [0.0, 0.3]]],
            "Sigma": [[1.0, 0.3], [0.3, 1.0]], "names": ["y", "z"]}"#,
    )?;
    let data = simulate(&dgp, 240, 7)?;
    let cfg = EstimateConfig::from_json(
        r#"{"horizon": 8, "estimators": [
            {"name": "lp", "method": "lp", "p": 4, "inference": "analytic",
             "identification": {"scheme": "recursive", "impulse": "y", "outcome": "z"}, "columns": ["y", "z"]},
            {"name": "var", "method": "var", "p": 4, "inference": "analytic",
             "identification": {"scheme": "recursive", "impulse": "y", "outcome": "z"}, "columns": ["y", "z"]}
        ]}"#,
    )?;
    let results = cfg.run(&data, None)?;
    for row in disagreement(&cfg.estimators, &results) {
        println!(
            "h={} lp={:+.3} var={:+.3} |diff|/se_var={}",
            row.horizon,
            row.theta_lp,
            row.theta_var,
            row.scaled_diff.map_or("-".into(), |d| format!("{d:.2}"))
        );
    }
    Ok(())
}
