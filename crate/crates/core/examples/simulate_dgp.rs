//! Simulate an ARMA(1,1) and a bivariate VAR, then print their true impulse responses.
//!
//! cargo run --release --example simulate_dgp

use irflab::{simulate, DgpSpec};

fn main() -> irflab::Result<()> {
    let arma = DgpSpec::arma11(0.85, 0.1, 1.0);
    let data = simulate(&arma, 240, 1)?;
    println!("ARMA(1,1): {} rows, columns {:?}", data.len(), data.names());
    println!("true responses of y: {:?}", arma.true_irf("y", 6)?.values);

    let varma: DgpSpec = serde_json::from_str(
        r#"{"kind": "varma", "A": [[[0.5, 0.1], [0.2, 0.4]]],
            "Sigma": [[1.0, 0.3], [0.3, 1.0]], "names": ["y", "z"]}"#,
    )?;
    let data = simulate(&varma, 240, 1)?;
    println!("VAR(1): columns {:?}", data.names());
    println!("true responses of z to the first shock: {:?}", varma.true_irf("z", 6)?.values);

    // same seed, same sample
    assert_eq!(simulate(&varma, 240, 1)?.column("z")?, data.column("z")?);
    Ok(())
}
