use irflab::boot::{block_length_rule, quantile_type7, resample_residuals};
use irflab::dgp::SHOCK_COLUMN;
use irflab::linalg::{derive_seed, substream};
use irflab::lp::OutcomeTransform;
use irflab::theory::{coverage_curve, prob_var_outside_lp};
use irflab::var::{cholesky_factor, var_estimate, VarOptions};
use irflab::{lp_estimate, simulate, DgpSpec, Identification, LpSpec, Normalization};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn varma2() -> DgpSpec {
    serde_json::from_str(
        r#"{"kind":"varma","A":[[[0.5,0.1],[0.2,0.4]]],"Sigma":[[1.0,0.3],[0.3,1.0]],"names":["y","z"]}"#,
    )
    .unwrap()
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn type7_quantile_is_monotone_and_bounded(
        mut xs in prop::collection::vec(-1e3f64..1e3, 1..60),
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        xs.sort_by(f64::total_cmp);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (ql, qh) = (quantile_type7(&xs, lo), quantile_type7(&xs, hi));
        prop_assert!(ql <= qh);
        prop_assert!(ql >= xs[0] && qh <= xs[xs.len() - 1]);
    }

    #[test]
    fn coverage_falls_with_bias(level in 0.5f64..0.99, b1 in 0.0f64..5.0, db in 0.0f64..3.0) {
        let c0 = coverage_curve(0.0, level).unwrap();
        prop_assert!((c0 - level).abs() < 1e-10);
        let c1 = coverage_curve(b1, level).unwrap();
        let c2 = coverage_curve(b1 + db, level).unwrap();
        prop_assert!(c2 <= c1 + 1e-12 && c1 <= level + 1e-12);
    }

    #[test]
    fn outside_probability_rises_with_misspecification(s in 0.0f64..5.0, ds in 0.0f64..3.0, r in 0.05f64..0.95) {
        let p1 = prob_var_outside_lp(s, r, 0.9).unwrap();
        let p2 = prob_var_outside_lp(s + ds, r, 0.9).unwrap();
        prop_assert!((0.0..=1.0).contains(&p1));
        prop_assert!(p2 >= p1 - 1e-12);
    }

    #[test]
    fn cholesky_reproduces_covariance(entries in prop::collection::vec(-2.0f64..2.0, 9)) {
        let l = DMatrix::from_row_slice(3, 3, &entries);
        let sigma = &l * l.transpose() + DMatrix::identity(3, 3);
        let b = cholesky_factor(&sigma).unwrap();
        prop_assert!((&b * b.transpose() - &sigma).amax() < 1e-8);
        for i in 0..3 {
            prop_assert!(b[(i, i)] > 0.0);
            for j in i + 1..3 {
                prop_assert_eq!(b[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn impact_lp_equals_var(seed in 0u64..10_000, p in 1usize..4) {
        let data = simulate(&varma2(), 200, seed).unwrap();
        let cols = names(&["y", "z"]);
        let lp = lp_estimate(&data, &LpSpec::recursive(&cols, "y", "z", p, 0).unwrap().with_bias_correction(false)).unwrap();
        let ident = Identification::Recursive { impulse: "y".into(), outcome: "z".into(), ordering: None };
        let opts = VarOptions { bias_correct: false, normalization: Normalization::UnitImpulse, ..VarOptions::default() };
        let var = var_estimate(&data, &cols, &ident, p, 0, opts).unwrap();
        prop_assert!((lp.theta[0] - var.theta[0]).abs() < 1e-8);
        prop_assert!((var.theta[0] - 1.0).abs() > 1e-6);
    }

    #[test]
    fn long_difference_invariance(seed in 0u64..10_000, p in 1usize..4) {
        let data = simulate(&DgpSpec::arma11(0.85, 0.1, 1.0), 200, seed).unwrap();
        let spec = LpSpec::new("y", SHOCK_COLUMN, p, 6).with_lagged(&names(&["y"]));
        let mut ld = spec.clone();
        ld.outcome_transform = OutcomeTransform::LongDifference;
        let (a, b) = (lp_estimate(&data, &spec).unwrap(), lp_estimate(&data, &ld).unwrap());
        for h in 0..=6 {
            prop_assert!((a.theta[h] - b.theta[h]).abs() < 1e-8);
        }
    }

    #[test]
    fn simulation_is_a_function_of_the_seed(seed in any::<u64>()) {
        let spec = DgpSpec::arma11(0.5, 0.3, 1.0);
        let a = simulate(&spec, 50, seed).unwrap();
        let (same, next) = (simulate(&spec, 50, seed).unwrap(), simulate(&spec, 50, seed.wrapping_add(1)).unwrap());
        prop_assert_eq!(a.column("y").unwrap(), same.column("y").unwrap());
        prop_assert_ne!(a.column("y").unwrap(), next.column("y").unwrap());
        prop_assert_eq!(derive_seed(seed, 3), derive_seed(seed, 3));
        prop_assert_ne!(derive_seed(seed, 3), derive_seed(seed, 4));
    }

    #[test]
    fn resampling_is_deterministic_and_shaped(seed in any::<u64>(), rows in 5usize..80, frac in 0.0f64..1.0) {
        let block = 1 + ((rows - 1) as f64 * frac) as usize;
        let u = DMatrix::from_fn(rows, 2, |i, j| ((i * 7 + j * 3) % 13) as f64 - 6.0);
        let a = resample_residuals(&u, block, &mut substream(seed, 0));
        let b = resample_residuals(&u, block, &mut substream(seed, 0));
        prop_assert_eq!(a.shape(), (rows, 2));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn block_rule_is_bounded(t in 2usize..5000) {
        let l = block_length_rule(t);
        prop_assert!(l >= 1 && l <= t / 2);
    }
}
