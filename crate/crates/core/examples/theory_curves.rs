//! Closed-form curves: VAR coverage under bias, the worst-case bias bound, and the
//! chance that a VAR estimate falls outside the LP interval.
//!
//! cargo run --release --example theory_curves

use irflab::theory::{bias_bound, coverage_grid, linspace, mse_prefers_var, prob_var_outside_lp};

fn main() -> irflab::Result<()> {
    for row in coverage_grid(&linspace(0.0, 4.0, 8), &[0.68, 0.90, 0.95])? {
        println!("bias/sd {:.1} level {:.2} coverage {:.3}", row.bias_ratio, row.level, row.coverage);
    }
    let b = bias_bound(1.0, 0.4)?;
    println!("worst-case bias/sd at sqrtTM=1, se ratio 0.4: {b:.4}");
    println!("MSE prefers VAR at bias/sd 2.0: {}", mse_prefers_var(2.0, 0.4)?);
    for s in [0.5, 1.0, 2.0, 3.0] {
        println!("P(VAR outside 90% LP interval | sqrtTM={s}) = {:.3}", prob_var_outside_lp(s, 0.4, 0.90)?);
    }
    Ok(())
}
