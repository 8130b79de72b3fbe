//! AIC lag selection on a VAR(2) and an LP/VAR pair estimated at the selected lag.
//!
//! cargo run --release --example aic_lag_selection

use irflab::estimator::{EstimatorSpec, LagChoice, Method};
use irflab::regress::{aic_select_var_lag, aic_values};
use irflab::var::Identification;
use irflab::{simulate, DgpSpec};

fn main() -> irflab::Result<()> {
    let dgp: DgpSpec = serde_json::from_str(
        r#"{"kind": "varma", "A": [[[0.5, 0.1], [0.0, 0.3]], [[-0.3, 0.0], [0.1, 0.2]]],
            "Sigma": [[1.0, 0.2], [0.2, 1.0]], "names": ["y", "z"]}"#,
    )?;
    let data = simulate(&dgp, 400, 9)?;
    let cols = vec!["y".to_string(), "z".to_string()];
    for (p, v) in aic_values(&data, &cols, 8)?.iter().enumerate() {
        println!("p={} AIC={v:.4}", p + 1);
    }
    println!("selected p = {}", aic_select_var_lag(&data, &cols, 8)?);

    let ident = Identification::Recursive {
        impulse: "y".into(),
        outcome: "z".into(),
        ordering: None,
    };
    for method in [Method::Lp, Method::Var] {
        let mut spec = EstimatorSpec::new("aic", method, 1).with_identification(ident.clone(), &cols);
        spec.p = LagChoice::Aic { aic: 8 };
        let irf = spec.estimate(&data, 6, None)?;
        println!("{:?} p={} theta={:?}", method, irf.p, irf.theta.iter().map(|t| (t * 1e3).round() / 1e3).collect::<Vec<_>>());
    }
    Ok(())
}
