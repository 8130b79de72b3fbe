//! Local projections: one least-squares regression per horizon of the future
//! outcome on the impulse, contemporaneous controls and lagged controls.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::irf::{IrfResult, METHOD_LP};
use crate::regress::{build_lag_design, ols_fit_labeled, DesignColumn, LagDesign};
use crate::var::Identification;

/// Name of the derived impulse column used by [`lp_estimate_weighted`].
pub const COMPOSITE_COLUMN: &str = "__composite";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeTransform {
    /// `y_{t+h}`
    #[default]
    Levels,
    /// `y_{t+h} - y_{t-1}`
    LongDifference,
}

/// Which lagged controls an observed-shock LP uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlSet {
    /// The shock plus every observable.
    #[default]
    Full,
    /// The shock plus the outcome.
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSpec {
    pub outcome: String,
    pub impulse: String,
    /// Regressors dated `t` (r_t).
    #[serde(default)]
    pub contemporaneous_controls: Vec<String>,
    /// Variables entering with lags `1..=p` (w_t).
    #[serde(default)]
    pub lagged_controls: Vec<String>,
    pub p: usize,
    /// Largest horizon H; horizons are `0..=H`.
    pub horizon: usize,
    #[serde(default = "yes")]
    pub bias_correct: bool,
    #[serde(default)]
    pub outcome_transform: OutcomeTransform,
}

fn yes() -> bool {
    true
}

impl LpSpec {
    pub fn new(outcome: &str, impulse: &str, p: usize, horizon: usize) -> Self {
        Self {
            outcome: outcome.to_string(),
            impulse: impulse.to_string(),
            contemporaneous_controls: Vec::new(),
            lagged_controls: Vec::new(),
            p,
            horizon,
            bias_correct: true,
            outcome_transform: OutcomeTransform::Levels,
        }
    }

    pub fn with_lagged(mut self, cols: &[String]) -> Self {
        self.lagged_controls = cols.to_vec();
        self
    }

    pub fn with_contemporaneous(mut self, cols: &[String]) -> Self {
        self.contemporaneous_controls = cols.to_vec();
        self
    }

    pub fn with_bias_correction(mut self, on: bool) -> Self {
        self.bias_correct = on;
        self
    }

    /// Observed shock as impulse, no contemporaneous controls, lags of the
    /// shock plus either every observable or only the outcome.
    pub fn observed_shock(
        shock: &str,
        outcome: &str,
        observables: &[String],
        controls: ControlSet,
        p: usize,
        horizon: usize,
    ) -> Self {
        let mut lagged = vec![shock.to_string()];
        match controls {
            ControlSet::Full => lagged.extend(observables.iter().filter(|c| *c != shock).cloned()),
            ControlSet::Small => {
                if outcome != shock {
                    lagged.push(outcome.to_string());
                }
            }
        }
        Self::new(outcome, shock, p, horizon).with_lagged(&lagged)
    }

    /// Recursive scheme: contemporaneous controls are the variables ordered
    /// before the impulse, lagged controls are the whole ordering.
    pub fn recursive(ordering: &[String], impulse: &str, outcome: &str, p: usize, horizon: usize) -> Result<Self> {
        let k = ordering
            .iter()
            .position(|c| c == impulse)
            .ok_or_else(|| Error::MissingColumn(impulse.to_string()))?;
        Ok(Self::new(outcome, impulse, p, horizon)
            .with_contemporaneous(&ordering[..k])
            .with_lagged(ordering))
    }

    /// LP spec matching a VAR identification scheme on `columns`.
    pub fn from_identification(
        ident: &Identification,
        columns: &[String],
        controls: ControlSet,
        p: usize,
        horizon: usize,
    ) -> Result<Self> {
        match ident {
            Identification::Recursive { .. } => {
                let ordering = ident.ordering(columns).expect("recursive has ordering");
                Self::recursive(&ordering, ident.impulse().unwrap(), ident.outcome(), p, horizon)
            }
            Identification::ObservedShock { shock, outcome } => Ok(Self::observed_shock(
                shock, outcome, columns, controls, p, horizon,
            )),
            Identification::WeightVector { outcome, .. } => {
                Ok(Self::new(outcome, COMPOSITE_COLUMN, p, horizon).with_lagged(columns))
            }
        }
    }

    /// Every dataset column the spec touches, impulse first.
    pub fn columns(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut add = |c: &String| {
            if !out.contains(c) {
                out.push(c.clone());
            }
        };
        add(&self.impulse);
        self.contemporaneous_controls.iter().for_each(&mut add);
        self.lagged_controls.iter().for_each(&mut add);
        add(&self.outcome);
        out
    }

    fn validate(&self, data: &Dataset) -> Result<()> {
        for c in self.columns() {
            data.index_of(&c)?;
        }
        if self.contemporaneous_controls.contains(&self.impulse) {
            return Err(Error::Input("impulse cannot also be a contemporaneous control".into()));
        }
        if self.outcome_transform == OutcomeTransform::LongDifference && self.p == 0 {
            return Err(Error::Input("long-difference outcomes need p >= 1".into()));
        }
        Ok(())
    }

    fn design(&self, data: &Dataset) -> Result<LagDesign> {
        let mut current = vec![self.impulse.clone()];
        current.extend(self.contemporaneous_controls.iter().cloned());
        build_lag_design(data, &current, &self.lagged_controls, self.p, true)
    }
}

/// Residual of the impulse on an intercept, the contemporaneous controls and
/// the lagged controls over the impact-horizon sample `t = p..T-1`.
pub fn residualize_shock(data: &Dataset, spec: &LpSpec) -> Result<Vec<f64>> {
    spec.validate(data)?;
    let design = build_lag_design(
        data,
        &spec.contemporaneous_controls,
        &spec.lagged_controls,
        spec.p,
        true,
    )?;
    let x = data.column(&spec.impulse)?;
    let target = DMatrix::from_fn(design.rows(), 1, |i, _| x[design.first_t + i]);
    let fit = ols_fit_labeled(&target, &design.x, false, Some(&design.labels()))?;
    Ok(fit.residuals.column(0).iter().cloned().collect())
}

/// Horizon-by-horizon LP with EHW standard errors; bias-corrected when the spec asks.
pub fn lp_estimate(data: &Dataset, spec: &LpSpec) -> Result<IrfResult> {
    let raw = lp_estimate_raw(data, spec)?;
    if spec.bias_correct {
        hj_bias_correct(&raw, data, spec)
    } else {
        Ok(raw)
    }
}

fn lp_estimate_raw(data: &Dataset, spec: &LpSpec) -> Result<IrfResult> {
    spec.validate(data)?;
    let design = spec.design(data)?;
    let labels = design.labels();
    let impulse_col = design
        .position(&DesignColumn::Current(spec.impulse.clone()))
        .expect("impulse is a design column");
    let y = data.column(&spec.outcome)?;
    let rows = design.rows();
    let k = design.x.ncols();

    let mut theta = Vec::with_capacity(spec.horizon + 1);
    let mut se = Vec::with_capacity(spec.horizon + 1);
    let mut n_obs = Vec::with_capacity(spec.horizon + 1);
    let mut notes = Vec::new();
    for h in 0..=spec.horizon {
        let n = rows.saturating_sub(h);
        if n <= k {
            if h == 0 {
                return Err(Error::InsufficientSample {
                    needed: k + spec.p,
                    available: data.len(),
                });
            }
            notes.push(format!(
                "horizons truncated at {} of {}: {n} observations for {k} regressors",
                h - 1,
                spec.horizon
            ));
            break;
        }
        let x = design.x.rows(0, n).into_owned();
        let target = DMatrix::from_fn(n, 1, |i, _| {
            let t = design.first_t + i;
            match spec.outcome_transform {
                OutcomeTransform::Levels => y[t + h],
                OutcomeTransform::LongDifference => y[t + h] - y[t - 1],
            }
        });
        let fit = match ols_fit_labeled(&target, &x, true, Some(&labels)) {
            Ok(fit) => fit,
            Err(Error::SingularDesign { columns }) if columns.contains(&spec.impulse) => {
                return Err(Error::DegenerateShock(format!(
                    "impulse '{}' has no variation left after the controls (collinear with [{}])",
                    spec.impulse,
                    columns.join(", ")
                )))
            }
            Err(e) => return Err(e),
        };
        if h == 0 && spec.outcome == spec.impulse && spec.outcome_transform == OutcomeTransform::Levels {
            // own response on impact is exactly one; skip the rounding residue
            theta.push(1.0);
            se.push(0.0);
        } else {
            theta.push(fit.coefficients[(impulse_col, 0)]);
            se.push(fit.se(impulse_col, 0));
        }
        n_obs.push(n);
    }
    let mut out = IrfResult::new(theta, METHOD_LP, spec.p, n_obs);
    out.se = Some(se);
    out.notes = notes;
    Ok(out)
}

/// LP on the composite impulse `β'w_t`, `w_t` being the spec's lagged controls.
pub fn lp_estimate_weighted(data: &Dataset, beta: &[f64], spec: &LpSpec) -> Result<IrfResult> {
    let w = &spec.lagged_controls;
    if beta.len() != w.len() {
        return Err(Error::Input(format!(
            "beta has length {} but there are {} lagged controls",
            beta.len(),
            w.len()
        )));
    }
    let cols = w.iter().map(|c| data.column(c)).collect::<Result<Vec<_>>>()?;
    let composite = (0..data.len())
        .map(|t| cols.iter().zip(beta).map(|(c, b)| b * c[t]).sum())
        .collect();
    let mut augmented = data.clone();
    augmented.push_column(COMPOSITE_COLUMN, composite)?;
    let mut spec = spec.clone();
    spec.impulse = COMPOSITE_COLUMN.to_string();
    lp_estimate(&augmented, &spec)
}

/// Iterative small-sample bias correction for LP coefficients.
///
/// With `W` the control design (intercept, contemporaneous and lagged
/// controls) on the horizon-`h` sample, in-sample residualization of the
/// impulse correlates `x̃_t` with the shocks dated `t+1..t+h` inside the LP
/// residual, giving to first order
/// `E[β̂_h] − β_h ≈ −Σ_{k<h} β_k c_{h−k} / (N_h − k_w)`, where
/// `c_j = Σ_t w_t'(W'W)⁻¹ w_{t+j}` is the sample analogue of
/// `tr(Γ_w(0)⁻¹ Γ_w(j))` and `k_w` the number of controls. Horizons are
/// corrected in order using the already corrected values below `h`; horizon
/// 0 is left unchanged.
pub fn hj_bias_correct(raw: &IrfResult, data: &Dataset, spec: &LpSpec) -> Result<IrfResult> {
    if raw.horizons.iter().enumerate().any(|(i, h)| *h != i) {
        return Err(Error::Input("bias correction needs contiguous horizons from 0".into()));
    }
    spec.validate(data)?;
    let design = build_lag_design(
        data,
        &spec.contemporaneous_controls,
        &spec.lagged_controls,
        spec.p,
        true,
    )?;
    let k_w = design.x.ncols();
    let mut corrected = raw.theta.clone();
    for h in 1..raw.len() {
        let n = raw.n_obs[h];
        if n <= k_w + h {
            break;
        }
        let w = design.x.rows(0, n);
        let gram = w.transpose() * w;
        let inv = gram
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .or_else(|| gram.pseudo_inverse(1e-12).ok())
            .ok_or_else(|| Error::SingularDesign {
                columns: design.labels(),
            })?;
        let q = w * inv;
        let c = |j: usize| -> f64 { (0..n - j).map(|t| q.row(t).dot(&w.row(t + j))).sum() };
        let shift: f64 = (0..h).map(|k| corrected[k] * c(h - k)).sum();
        corrected[h] = raw.theta[h] + shift / (n - k_w) as f64;
    }
    let mut out = raw.clone();
    out.correction = Some(corrected.iter().zip(&raw.theta).map(|(c, r)| c - r).collect());
    out.theta = corrected;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{simulate, DgpSpec, SHOCK_COLUMN};

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn arma_data(t: usize, seed: u64) -> Dataset {
        simulate(&DgpSpec::arma11(0.85, 0.1, 1.0), t, seed).unwrap()
    }

    #[test]
    fn fwl_identity_each_horizon() {
        let data = arma_data(300, 1);
        let spec = LpSpec::observed_shock(SHOCK_COLUMN, "y", &s(&["y"]), ControlSet::Full, 1, 6)
            .with_bias_correction(false);
        let irf = lp_estimate(&data, &spec).unwrap();
        let y = data.column("y").unwrap();
        for h in 0..=6 {
            // x̃ on the horizon-h sample
            let mut sub = spec.clone();
            sub.horizon = 0;
            let n = irf.n_obs[h];
            let trimmed = Dataset::new(
                data.names()
                    .iter()
                    .map(|c| (c.clone(), data.column(c).unwrap()[..n + spec.p].to_vec()))
                    .collect(),
            )
            .unwrap();
            let xt = residualize_shock(&trimmed, &sub).unwrap();
            let num: f64 = xt.iter().enumerate().map(|(i, x)| x * y[spec.p + i + h]).sum();
            let den: f64 = xt.iter().map(|x| x * x).sum();
            assert!((irf.theta[h] - num / den).abs() < 1e-8, "h={h}");
        }
    }

    #[test]
    fn long_difference_matches_levels() {
        let data = arma_data(240, 2);
        let spec = LpSpec::new("y", "y", 2, 8).with_lagged(&s(&["y"]));
        let mut ld = spec.clone();
        ld.outcome_transform = OutcomeTransform::LongDifference;
        let a = lp_estimate(&data, &spec).unwrap();
        let b = lp_estimate(&data, &ld).unwrap();
        for h in 0..=8 {
            assert!((a.theta[h] - b.theta[h]).abs() < 1e-8);
        }
    }

    #[test]
    fn orthogonal_control_has_no_effect() {
        let data = arma_data(200, 3);
        let spec = LpSpec::new("y", SHOCK_COLUMN, 1, 0)
            .with_lagged(&s(&[SHOCK_COLUMN, "y"]))
            .with_bias_correction(false);
        let base = lp_estimate(&data, &spec).unwrap();
        let design = spec.design(&data).unwrap();
        // a regressor orthogonal in sample to every column of the design and to y_t
        let y = data.column("y").unwrap();
        let mut m = design.x.clone().insert_column(design.x.ncols(), 0.0);
        let target: Vec<f64> = (0..design.rows()).map(|i| y[design.first_t + i]).collect();
        m.set_column(m.ncols() - 1, &nalgebra::DVector::from_vec(target));
        let z = nalgebra::DVector::from_fn(design.rows(), |i, _| ((i * 37) % 11) as f64 - 5.0);
        let q = m.clone().qr().q();
        let z_perp = &z - &q * (q.transpose() * &z);
        let mut col = vec![0.0; data.len()];
        for i in 0..design.rows() {
            col[design.first_t + i] = z_perp[i];
        }
        let mut aug = data.clone();
        aug.push_column("orth", col).unwrap();
        let mut s2 = spec.clone();
        s2.contemporaneous_controls.push("orth".into());
        let with = lp_estimate(&aug, &s2).unwrap();
        assert!((base.theta[0] - with.theta[0]).abs() < 1e-8);
    }

    #[test]
    fn affine_rescaling_of_outcome() {
        let data = arma_data(240, 4);
        let spec = LpSpec::new("y", "y", 1, 5).with_lagged(&s(&["y"])).with_bias_correction(false);
        let base = lp_estimate(&data, &spec).unwrap();
        let mut aug = data.clone();
        let scaled = data.column("y").unwrap().iter().map(|v| 3.0 * v + 7.0).collect();
        aug.push_column("y3", scaled).unwrap();
        let mut s2 = spec.clone();
        s2.outcome = "y3".into();
        let r = lp_estimate(&aug, &s2).unwrap();
        for h in 1..=5 {
            assert!((r.theta[h] - 3.0 * base.theta[h]).abs() < 1e-8);
            let (a, b) = (r.se.as_ref().unwrap()[h], base.se.as_ref().unwrap()[h]);
            assert!((a - 3.0 * b).abs() < 1e-8);
        }
    }

    #[test]
    fn degenerate_impulse_is_reported() {
        let data = arma_data(100, 5);
        let mut aug = data.clone();
        let y = data.column("y").unwrap();
        let lagged: Vec<f64> = (0..y.len()).map(|t| if t == 0 { 0.0 } else { 2.0 * y[t - 1] }).collect();
        aug.push_column("x", lagged).unwrap();
        let spec = LpSpec::new("y", "x", 1, 3).with_lagged(&s(&["y"]));
        let xt = residualize_shock(&aug, &spec).unwrap();
        assert!(xt.iter().all(|v| v.abs() < 1e-10));
        assert!(matches!(lp_estimate(&aug, &spec), Err(Error::DegenerateShock(_))));
    }

    #[test]
    fn weighted_reduces_and_scales() {
        let data = arma_data(240, 6);
        let spec = LpSpec::new("y", SHOCK_COLUMN, 1, 4)
            .with_lagged(&s(&[SHOCK_COLUMN, "y"]))
            .with_bias_correction(false);
        let direct = lp_estimate(&data, &spec).unwrap();
        let w = lp_estimate_weighted(&data, &[1.0, 0.0], &spec).unwrap();
        let w3 = lp_estimate_weighted(&data, &[3.0, 0.0], &spec).unwrap();
        for h in 0..=4 {
            assert!((direct.theta[h] - w.theta[h]).abs() < 1e-10);
            assert!((w3.theta[h] - direct.theta[h] / 3.0).abs() < 1e-10);
        }
        assert!(matches!(
            lp_estimate_weighted(&data, &[0.0, 0.0], &spec),
            Err(Error::DegenerateShock(_))
        ));
    }

    #[test]
    fn bias_correction_keeps_impact() {
        let data = arma_data(240, 7);
        let spec = LpSpec::new("y", "y", 1, 8).with_lagged(&s(&["y"]));
        let raw = lp_estimate(&data, &spec.clone().with_bias_correction(false)).unwrap();
        let bc = lp_estimate(&data, &spec).unwrap();
        assert_eq!(raw.theta[0], bc.theta[0]);
        assert_eq!(bc.correction.as_ref().unwrap()[0], 0.0);
        assert!(bc.theta[3] != raw.theta[3]);
    }

    #[test]
    fn bias_correction_closed_form_without_controls() {
        // intercept-only controls: c_j = (N_h - j) / N_h
        let data = arma_data(150, 9);
        let spec = LpSpec::new("y", SHOCK_COLUMN, 0, 5);
        let raw = lp_estimate(&data, &spec.clone().with_bias_correction(false)).unwrap();
        let bc = lp_estimate(&data, &spec).unwrap();
        let mut expect = raw.theta.clone();
        for h in 1..=5 {
            let n = raw.n_obs[h] as f64;
            let shift: f64 = (0..h).map(|k| expect[k] * (n - (h - k) as f64) / n).sum();
            expect[h] = raw.theta[h] + shift / (n - 1.0);
        }
        for h in 0..=5 {
            assert!((bc.theta[h] - expect[h]).abs() < 1e-12, "h={h}");
        }
    }

    #[test]
    fn horizons_truncate_with_note() {
        let data = arma_data(12, 8);
        let spec = LpSpec::new("y", "y", 1, 20).with_lagged(&s(&["y"])).with_bias_correction(false);
        let r = lp_estimate(&data, &spec).unwrap();
        assert!(r.len() < 21);
        assert!(!r.notes.is_empty());
    }
}
