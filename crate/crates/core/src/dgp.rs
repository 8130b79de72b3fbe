//! ARMA(1,1) and VARMA data-generating processes with known impulse responses.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{companion_radius, substream};

/// Name of the emitted structural shock column.
pub const SHOCK_COLUMN: &str = "__shock";

/// Outcome column name of the univariate ARMA(1,1) process.
pub const ARMA_OUTCOME: &str = "y";

pub const DEFAULT_BURN_IN: usize = 200;

/// Stationarity margin on the companion spectral radius.
pub const STATIONARITY_MARGIN: f64 = 1e-6;

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

/// Parametric description of a simulated process.
///
/// JSON form: `{"kind": "arma11", "rho": .., "alpha": .., "sigma": .., "burn_in": ..}`
/// or `{"kind": "varma", "A": [[[..]]], "Theta": [[[..]]], "Sigma": [[..]], "burn_in": ..}`.
/// Matrices are lists of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DgpSpec {
    Arma11 {
        rho: f64,
        alpha: f64,
        sigma: f64,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
    },
    Varma {
        #[serde(rename = "A")]
        a: Vec<Vec<Vec<f64>>>,
        #[serde(rename = "Theta", default)]
        theta: Vec<Vec<Vec<f64>>>,
        #[serde(rename = "Sigma")]
        sigma: Vec<Vec<f64>>,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
        /// Variable names; defaults to `y1..yn`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
        /// Direction `w` of the emitted structural shock `w'η_t`; defaults to `e_1`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shock_weight: Option<Vec<f64>>,
    },
}

/// Validated VARMA in matrix form: `w_t = Σ A_ℓ w_{t-ℓ} + ε_t + Σ Θ_j ε_{t-j}`,
/// `ε_t = B η_t`, `BB' = Σ`.
#[derive(Debug, Clone)]
pub struct VarmaModel {
    pub ar: Vec<DMatrix<f64>>,
    pub ma: Vec<DMatrix<f64>>,
    pub sigma: DMatrix<f64>,
    pub chol: DMatrix<f64>,
    pub names: Vec<String>,
    /// Unit-norm structural shock direction.
    pub shock_weight: DVector<f64>,
}

impl VarmaModel {
    pub fn n(&self) -> usize {
        self.sigma.nrows()
    }

    /// Reduced-form MA(∞) coefficients Ψ_0..Ψ_H.
    pub fn psi(&self, horizon: usize) -> Vec<DMatrix<f64>> {
        let n = self.n();
        let mut psi: Vec<DMatrix<f64>> = Vec::with_capacity(horizon + 1);
        for h in 0..=horizon {
            let mut m = if h == 0 {
                DMatrix::identity(n, n)
            } else if h <= self.ma.len() {
                self.ma[h - 1].clone()
            } else {
                DMatrix::zeros(n, n)
            };
            for l in 1..=h.min(self.ar.len()) {
                m += &self.ar[l - 1] * &psi[h - l];
            }
            psi.push(m);
        }
        psi
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Input(format!("{what} is not a rectangular matrix")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input(format!("{what} has non-finite entries")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl DgpSpec {
    pub fn burn_in(&self) -> usize {
        match self {
            DgpSpec::Arma11 { burn_in, .. } | DgpSpec::Varma { burn_in, .. } => *burn_in,
        }
    }

    pub fn arma11(rho: f64, alpha: f64, sigma: f64) -> Self {
        DgpSpec::Arma11 {
            rho,
            alpha,
            sigma,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    /// Names of the observable columns (excluding the shock column).
    pub fn variable_names(&self) -> Result<Vec<String>> {
        match self {
            DgpSpec::Arma11 { .. } => Ok(vec![ARMA_OUTCOME.to_string()]),
            DgpSpec::Varma { .. } => Ok(self.varma_model()?.names),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DgpSpec::Arma11 {
                rho, alpha, sigma, ..
            } => {
                if !(rho.is_finite() && alpha.is_finite() && sigma.is_finite()) {
                    return Err(Error::Input("ARMA parameters must be finite".into()));
                }
                if rho.abs() >= 1.0 {
                    return Err(Error::NonStationary(format!(
                        "ARMA(1,1) requires |rho| < 1, got rho = {rho}"
                    )));
                }
                if *sigma <= 0.0 {
                    return Err(Error::Input(format!("sigma must be positive, got {sigma}")));
                }
                Ok(())
            }
            DgpSpec::Varma { .. } => self.varma_model().map(|_| ()),
        }
    }

    /// Matrix form of the process (ARMA(1,1) maps to a scalar VARMA(1,1)).
    pub fn varma_model(&self) -> Result<VarmaModel> {
        match self {
            DgpSpec::Arma11 {
                rho, alpha, sigma, ..
            } => {
                self.validate()?;
                Ok(VarmaModel {
                    ar: vec![DMatrix::from_element(1, 1, *rho)],
                    ma: vec![DMatrix::from_element(1, 1, *alpha)],
                    sigma: DMatrix::from_element(1, 1, sigma * sigma),
                    chol: DMatrix::from_element(1, 1, *sigma),
                    names: vec![ARMA_OUTCOME.to_string()],
                    shock_weight: DVector::from_element(1, 1.0),
                })
            }
            DgpSpec::Varma {
                a,
                theta,
                sigma,
                names,
                shock_weight,
                ..
            } => {
                let sigma = matrix_from_rows(sigma, "Sigma")?;
                let n = sigma.nrows();
                if sigma.ncols() != n {
                    return Err(Error::Input("Sigma must be square".into()));
                }
                if (&sigma - sigma.transpose()).amax() > 1e-12 * sigma.amax().max(1.0) {
                    return Err(Error::Input("Sigma must be symmetric".into()));
                }
                let chol = sigma
                    .clone()
                    .cholesky()
                    .ok_or_else(|| Error::Input("Sigma has no Cholesky factor".into()))?
                    .l();
                let load = |mats: &[Vec<Vec<f64>>], what: &str| -> Result<Vec<DMatrix<f64>>> {
                    mats.iter()
                        .enumerate()
                        .map(|(i, m)| {
                            let m = matrix_from_rows(m, &format!("{what}[{i}]"))?;
                            if m.shape() != (n, n) {
                                return Err(Error::Input(format!(
                                    "{what}[{i}] must be {n}x{n}"
                                )));
                            }
                            Ok(m)
                        })
                        .collect()
                };
                let ar = load(a, "A")?;
                let ma = load(theta, "Theta")?;
                let radius = companion_radius(&ar);
                if radius >= 1.0 - STATIONARITY_MARGIN {
                    return Err(Error::NonStationary(format!(
                        "companion spectral radius {radius:.6} is not below 1"
                    )));
                }
                let names = match names {
                    Some(names) if names.len() == n => names.clone(),
                    Some(names) => {
                        return Err(Error::Input(format!(
                            "{} names given for {n} variables",
                            names.len()
                        )))
                    }
                    None => (1..=n).map(|i| format!("y{i}")).collect(),
                };
                if names.iter().any(|s| s == SHOCK_COLUMN) {
                    return Err(Error::Input(format!("'{SHOCK_COLUMN}' is reserved")));
                }
                let w = match shock_weight {
                    Some(w) if w.len() == n => DVector::from_column_slice(w),
                    Some(w) => {
                        return Err(Error::Input(format!(
                            "shock_weight has length {} but the system has {n} variables",
                            w.len()
                        )))
                    }
                    None => {
                        let mut e = DVector::zeros(n);
                        e[0] = 1.0;
                        e
                    }
                };
                let norm = w.norm();
                if !(norm.is_finite() && norm > 0.0) {
                    return Err(Error::Input("shock_weight must be a nonzero vector".into()));
                }
                Ok(VarmaModel {
                    ar,
                    ma,
                    sigma,
                    chol,
                    names,
                    shock_weight: w / norm,
                })
            }
        }
    }

    /// True response of `outcome` to the emitted shock, horizons `0..=horizon`.
    pub fn true_irf(&self, outcome: &str, horizon: usize) -> Result<TrueIrf> {
        match self {
            DgpSpec::Arma11 { rho, alpha, .. } => {
                self.validate()?;
                match outcome {
                    ARMA_OUTCOME => Ok(true_irf_arma11(*rho, *alpha, horizon)),
                    SHOCK_COLUMN => Ok(TrueIrf {
                        values: (0..=horizon).map(|h| if h == 0 { 1.0 } else { 0.0 }).collect(),
                        responses: None,
                    }),
                    other => Err(Error::MissingColumn(other.to_string())),
                }
            }
            DgpSpec::Varma { .. } => {
                let model = self.varma_model()?;
                let idx = model
                    .names
                    .iter()
                    .position(|n| n == outcome)
                    .ok_or_else(|| Error::MissingColumn(outcome.to_string()))?;
                true_irf_varma(self, model.shock_weight.as_slice(), idx, horizon)
            }
        }
    }
}

/// Known impulse response path.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueIrf {
    /// θ_0..θ_H for the selected outcome.
    pub values: Vec<f64>,
    /// Responses of every variable, when available.
    pub responses: Option<Vec<DVector<f64>>>,
}

/// θ_h = ρ^h + αρ^{h-1} for h ≥ 1, θ_0 = 1.
pub fn true_irf_arma11(rho: f64, alpha: f64, horizon: usize) -> TrueIrf {
    let values = (0..=horizon)
        .map(|h| {
            if h == 0 {
                1.0
            } else {
                rho.powi(h as i32) + alpha * rho.powi(h as i32 - 1)
            }
        })
        .collect();
    TrueIrf {
        values,
        responses: None,
    }
}

/// Response `Ψ_h B w` to a structural shock with direction `shock_weight`
/// (normalized to unit length), read off at variable `outcome`.
pub fn true_irf_varma(
    spec: &DgpSpec,
    shock_weight: &[f64],
    outcome: usize,
    horizon: usize,
) -> Result<TrueIrf> {
    let model = spec.varma_model()?;
    let n = model.n();
    if shock_weight.len() != n {
        return Err(Error::Input(format!(
            "shock weight has length {} but the system has {n} variables",
            shock_weight.len()
        )));
    }
    if outcome >= n {
        return Err(Error::Input(format!("outcome index {outcome} out of range")));
    }
    let w = DVector::from_column_slice(shock_weight);
    let norm = w.norm();
    if !(norm > 0.0) {
        return Err(Error::Input("shock weight must be nonzero".into()));
    }
    let impact = &model.chol * (w / norm);
    let responses: Vec<DVector<f64>> = model.psi(horizon).iter().map(|p| p * &impact).collect();
    Ok(TrueIrf {
        values: responses.iter().map(|r| r[outcome]).collect(),
        responses: Some(responses),
    })
}

/// √(T·M) with M = Σ_ℓ tr{Σ Θ_ℓ' Σ⁻¹ Θ_ℓ}.
pub fn misspec_magnitude(theta: &[DMatrix<f64>], sigma: &DMatrix<f64>, t: usize) -> Result<f64> {
    let n = sigma.nrows();
    if sigma.ncols() != n {
        return Err(Error::Input("Sigma must be square".into()));
    }
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Input("Sigma must be symmetric positive definite".into()))?;
    let mut m = 0.0;
    for (l, th) in theta.iter().enumerate() {
        if th.shape() != (n, n) {
            return Err(Error::Input(format!("Theta[{l}] must be {n}x{n}")));
        }
        let sinv_th = chol.solve(th);
        m += (sigma * th.transpose() * sinv_th).trace();
    }
    Ok((t as f64 * m.max(0.0)).sqrt())
}

/// Simulates `t` observations plus the structural shock column.
pub fn simulate(spec: &DgpSpec, t: usize, seed: u64) -> Result<Dataset> {
    if t == 0 {
        return Err(Error::Input("sample length must be at least 1".into()));
    }
    spec.validate()?;
    let burn = spec.burn_in();
    let total = burn + t;
    let mut rng = substream(seed, 0);
    match spec {
        DgpSpec::Arma11 {
            rho, alpha, sigma, ..
        } => {
            let mut y = Vec::with_capacity(total);
            let mut eps = Vec::with_capacity(total);
            let (mut y_prev, mut e_prev) = (0.0, 0.0);
            for _ in 0..total {
                let z: f64 = StandardNormal.sample(&mut rng);
                let e = sigma * z;
                let yt = rho * y_prev + e + alpha * e_prev;
                y.push(yt);
                eps.push(e);
                y_prev = yt;
                e_prev = e;
            }
            Dataset::new(vec![
                (ARMA_OUTCOME.to_string(), y.split_off(burn)),
                (SHOCK_COLUMN.to_string(), eps.split_off(burn)),
            ])
        }
        DgpSpec::Varma { .. } => {
            let model = spec.varma_model()?;
            let n = model.n();
            let p = model.ar.len();
            let q = model.ma.len();
            let mut w: Vec<DVector<f64>> = Vec::with_capacity(total);
            let mut eps: Vec<DVector<f64>> = Vec::with_capacity(total);
            let mut shock = Vec::with_capacity(total);
            for s in 0..total {
                let eta = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                shock.push(model.shock_weight.dot(&eta));
                let e = &model.chol * eta;
                let mut wt = e.clone();
                for l in 1..=p.min(s) {
                    wt += &model.ar[l - 1] * &w[s - l];
                }
                for j in 1..=q.min(s) {
                    wt += &model.ma[j - 1] * &eps[s - j];
                }
                w.push(wt);
                eps.push(e);
            }
            let mut cols: Vec<(String, Vec<f64>)> = model
                .names
                .iter()
                .enumerate()
                .map(|(i, name)| (name.clone(), w[burn..].iter().map(|v| v[i]).collect()))
                .collect();
            cols.push((SHOCK_COLUMN.to_string(), shock.split_off(burn)));
            Dataset::new(cols)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn autocorr1(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
        let c1: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        c1 / c0
    }

    #[test]
    fn arma_irf_closed_form() {
        let irf = true_irf_arma11(0.85, 0.1, 2);
        assert_eq!(irf.values[0], 1.0);
        assert!((irf.values[1] - 0.95).abs() < 1e-15);
        assert!((irf.values[2] - 0.8075).abs() < 1e-15);
        let ar = true_irf_arma11(0.7, 0.0, 6);
        for (h, v) in ar.values.iter().enumerate() {
            assert!((v - 0.7f64.powi(h as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn varma_recursion_reduces_to_arma() {
        for &(rho, alpha) in &[(0.85, 0.1), (0.95, -0.3), (-0.4, 0.7), (0.0, 0.0)] {
            let spec = DgpSpec::Varma {
                a: vec![vec![vec![rho]]],
                theta: vec![vec![vec![alpha]]],
                sigma: vec![vec![1.0]],
                burn_in: 0,
                names: None,
                shock_weight: None,
            };
            let v = true_irf_varma(&spec, &[1.0], 0, 20).unwrap();
            let a = true_irf_arma11(rho, alpha, 20);
            for h in 0..=20 {
                assert!((v.values[h] - a.values[h]).abs() < 1e-12, "h={h}");
            }
        }
    }

    #[test]
    fn varma_impact_is_cholesky_column() {
        let spec = DgpSpec::Varma {
            a: vec![vec![vec![0.5, 0.1], vec![0.0, 0.3]]],
            theta: vec![],
            sigma: vec![vec![4.0, 2.0], vec![2.0, 5.0]],
            burn_in: 0,
            names: None,
            shock_weight: None,
        };
        // B = [[2,0],[1,2]]
        let v = true_irf_varma(&spec, &[1.0, 0.0], 1, 0).unwrap();
        assert!((v.values[0] - 1.0).abs() < 1e-12);
        let v = true_irf_varma(&spec, &[0.0, 1.0], 1, 0).unwrap();
        assert!((v.values[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn misspecification_magnitude_anchors() {
        let sigma = DMatrix::from_element(1, 1, 1.0);
        let th = |a: f64| vec![DMatrix::from_element(1, 1, a)];
        assert!((misspec_magnitude(&th(0.1), &sigma, 100).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(misspec_magnitude(&th(0.0), &sigma, 100).unwrap(), 0.0);
        assert_eq!(misspec_magnitude(&[], &sigma, 100).unwrap(), 0.0);
        let v = misspec_magnitude(&th(0.2), &sigma, 240).unwrap();
        assert!((v - (240.0f64 * 0.04).sqrt()).abs() < 1e-12);
        assert!((v - 3.0984).abs() < 1e-4);
        // scale invariance in sigma
        let s9 = DMatrix::from_element(1, 1, 9.0);
        assert!((misspec_magnitude(&th(0.2), &s9, 240).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn nonstationary_specs_rejected() {
        assert!(matches!(
            simulate(&DgpSpec::arma11(1.0, 0.0, 1.0), 10, 1),
            Err(Error::NonStationary(_))
        ));
        let spec = DgpSpec::Varma {
            a: vec![vec![vec![1.2, 0.0], vec![0.0, 0.2]]],
            theta: vec![],
            sigma: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            burn_in: 10,
            names: None,
            shock_weight: None,
        };
        assert!(matches!(spec.validate(), Err(Error::NonStationary(_))));
    }

    #[test]
    fn simulation_is_deterministic() {
        let spec = DgpSpec::arma11(0.85, 0.1, 1.0);
        let a = simulate(&spec, 300, 42).unwrap();
        let b = simulate(&spec, 300, 42).unwrap();
        let c = simulate(&spec, 300, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.names(), &["y".to_string(), SHOCK_COLUMN.to_string()]);
    }

    #[test]
    fn white_noise_and_arma_autocorrelation() {
        let wn = simulate(&DgpSpec::arma11(0.0, 0.0, 1.0), 100_000, 5).unwrap();
        assert!(autocorr1(wn.column("y").unwrap()).abs() < 0.01);

        let (rho, alpha) = (0.85f64, 0.1f64);
        let arma = simulate(&DgpSpec::arma11(rho, alpha, 1.0), 100_000, 6).unwrap();
        let theory = (1.0 + rho * alpha) * (rho + alpha) / (1.0 + 2.0 * rho * alpha + alpha * alpha);
        assert!((theory - 0.873517).abs() < 1e-6);
        assert!((autocorr1(arma.column("y").unwrap()) - theory).abs() < 0.01);
    }

    #[test]
    fn json_roundtrip_and_defaults() {
        let spec: DgpSpec =
            serde_json::from_str(r#"{"kind":"arma11","rho":0.85,"alpha":0.1,"sigma":1.0}"#).unwrap();
        assert_eq!(spec.burn_in(), DEFAULT_BURN_IN);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<DgpSpec>(&text).unwrap(), spec);

        let v: DgpSpec = serde_json::from_str(
            r#"{"kind":"varma","A":[[[0.5,0.0],[0.1,0.4]]],"Theta":[[[0.1,0.0],[0.0,0.1]]],
                "Sigma":[[1.0,0.2],[0.2,1.0]],"burn_in":50}"#,
        )
        .unwrap();
        let ds = simulate(&v, 25, 1).unwrap();
        assert_eq!(ds.n_columns(), 3);
        assert_eq!(ds.len(), 25);
    }
}
