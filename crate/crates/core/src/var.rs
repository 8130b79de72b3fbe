//! Reduced-form VARs, Pope small-sample bias correction, recursive and
//! weight-vector structural identification, and delta-method standard errors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::irf::{IrfResult, METHOD_VAR, METHOD_VAR_DELTA};
use crate::linalg::{companion, discrete_lyapunov, spectral_radius, unvech, vech};
use crate::regress::{build_lag_design, ols_fit_labeled};

/// Corrected fits are damped until their companion radius is at most `1 - margin`.
pub const POPE_STATIONARITY_MARGIN: f64 = 1e-6;
const POPE_DAMPING_STEP: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct VarFit {
    /// A_1..A_p, each n×n.
    pub lags: Vec<DMatrix<f64>>,
    pub intercept: DVector<f64>,
    pub has_intercept: bool,
    /// Σ̂ = û'û / T_eff
    pub sigma: DMatrix<f64>,
    /// T_eff × n
    pub residuals: DMatrix<f64>,
    /// Regressor matrix of the fit, kept for sandwich covariances.
    pub design: DMatrix<f64>,
    pub xtx_inv: DMatrix<f64>,
    pub names: Vec<String>,
    /// First time index (0-based) of the estimation sample.
    pub first_t: usize,
    /// Damping factor applied to the Pope correction; `None` when uncorrected.
    pub pope_damping: Option<f64>,
    pub warnings: Vec<String>,
}

impl VarFit {
    pub fn p(&self) -> usize {
        self.lags.len()
    }

    pub fn n(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn effective_t(&self) -> usize {
        self.residuals.nrows()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn companion_radius(&self) -> f64 {
        if self.lags.is_empty() {
            0.0
        } else {
            spectral_radius(&companion(&self.lags))
        }
    }

    /// Unconditional mean implied by the intercept and lags.
    pub fn implied_mean(&self) -> Option<DVector<f64>> {
        let n = self.n();
        let mut m = DMatrix::identity(n, n);
        for a in &self.lags {
            m -= a;
        }
        m.lu().solve(&self.intercept)
    }
}

pub fn fit_var(data: &Dataset, columns: &[String], p: usize, intercept: bool) -> Result<VarFit> {
    let n = columns.len();
    if n == 0 {
        return Err(Error::Input("VAR needs at least one column".into()));
    }
    if p == 0 {
        return Err(Error::Input("VAR lag length must be at least 1".into()));
    }
    let needed = n * p + 1;
    if data.len() <= needed + p {
        return Err(Error::InsufficientSample {
            needed: needed + p,
            available: data.len(),
        });
    }
    let design = build_lag_design(data, &[], columns, p, intercept)?;
    let fit = ols_fit_labeled(&design.y, &design.x, true, Some(&design.labels()))?;
    let offset = usize::from(intercept);
    let coef = &fit.coefficients;
    let lags = (0..p)
        .map(|l| DMatrix::from_fn(n, n, |i, j| coef[(offset + l * n + j, i)]))
        .collect();
    let intercept_vec = if intercept {
        coef.row(0).transpose()
    } else {
        DVector::zeros(n)
    };
    let t_eff = fit.effective_t as f64;
    let sigma = fit.residuals.transpose() * &fit.residuals / t_eff;
    Ok(VarFit {
        lags,
        intercept: intercept_vec,
        has_intercept: intercept,
        sigma: (&sigma + sigma.transpose()) * 0.5,
        residuals: fit.residuals,
        design: design.x,
        xtx_inv: fit.xtx_inv,
        names: columns.to_vec(),
        first_t: design.first_t,
        pope_damping: None,
        warnings: Vec::new(),
    })
}

/// First-order bias term `b` with `E[Â] − A ≈ −b/T` for the companion form
/// `Y_t = A Y_{t-1} + U_t` estimated with a mean:
/// `b = Σ_U [(I−A')⁻¹ + A'(I−A'²)⁻¹ + Σ_λ λ(I−λA')⁻¹] Γ_0⁻¹`.
pub fn pope_bias_term(lags: &[DMatrix<f64>], sigma: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = sigma.nrows();
    let a = companion(lags);
    let m = a.nrows();
    let mut sigma_u = DMatrix::zeros(m, m);
    sigma_u.view_mut((0, 0), (n, n)).copy_from(sigma);
    let gamma0 = discrete_lyapunov(&a, &sigma_u);
    let gamma0_inv = gamma0.clone().cholesky()?.inverse();

    let id = DMatrix::<f64>::identity(m, m);
    let at = a.transpose();
    let mut bracket = (&id - &at).try_inverse()?;
    bracket += &at * (&id - &at * &at).try_inverse()?;

    let at_c: DMatrix<Complex64> = at.map(|v| Complex64::new(v, 0.0));
    let id_c = DMatrix::<Complex64>::identity(m, m);
    let mut eig_sum = DMatrix::<Complex64>::zeros(m, m);
    for lambda in a.complex_eigenvalues().iter() {
        let inv = (&id_c - &at_c * *lambda).try_inverse()?;
        eig_sum += inv * *lambda;
    }
    bracket += eig_sum.map(|z| z.re);
    Some(sigma_u * bracket * gamma0_inv)
}

/// Pope analytical bias correction of the lag matrices.
///
/// The corrected companion matrix is `Â + δ·b/T` with `δ = 1` unless that is
/// explosive, in which case `δ` is lowered in steps of 0.01 until the radius is
/// at most `1 - 1e-6`. The intercept is reset so the implied mean is unchanged.
/// A non-stationary input is returned unchanged with a warning.
pub fn pope_correct(fit: &VarFit) -> VarFit {
    let mut out = fit.clone();
    let radius = fit.companion_radius();
    if !(radius < 1.0) {
        out.warnings.push(format!(
            "Pope correction skipped: input companion radius {radius:.6} is not below 1"
        ));
        return out;
    }
    let Some(b) = pope_bias_term(&fit.lags, &fit.sigma) else {
        out.warnings
            .push("Pope correction skipped: bias term could not be evaluated".into());
        return out;
    };
    let n = fit.n();
    let t = fit.effective_t() as f64;
    let corrected = |delta: f64| -> Vec<DMatrix<f64>> {
        fit.lags
            .iter()
            .enumerate()
            .map(|(l, a)| a + b.view((0, l * n), (n, n)) * (delta / t))
            .collect()
    };
    let mut delta = 1.0f64;
    let mut lags = corrected(delta);
    while spectral_radius(&companion(&lags)) > 1.0 - POPE_STATIONARITY_MARGIN {
        delta -= POPE_DAMPING_STEP;
        if delta <= 1e-12 {
            delta = 0.0;
            lags = fit.lags.clone();
            break;
        }
        lags = corrected(delta);
    }
    if delta < 1.0 {
        out.warnings
            .push(format!("Pope correction damped by factor {delta:.2} to keep stationarity"));
    }
    if fit.has_intercept {
        if let Some(mu) = fit.implied_mean() {
            let mut m = DMatrix::identity(n, n);
            for a in &lags {
                m -= a;
            }
            out.intercept = m * mu;
        }
    }
    out.lags = lags;
    out.pope_damping = Some(delta);
    out
}

/// Reduced-form responses `C_h = Σ_{ℓ≤min(h,p)} A_ℓ C_{h-ℓ}`, `C_0 = I`.
pub fn reduced_irf_from_lags(lags: &[DMatrix<f64>], n: usize, horizon: usize) -> Vec<DMatrix<f64>> {
    let mut c: Vec<DMatrix<f64>> = Vec::with_capacity(horizon + 1);
    c.push(DMatrix::identity(n, n));
    for h in 1..=horizon {
        let mut m = DMatrix::zeros(n, n);
        for l in 1..=h.min(lags.len()) {
            m += &lags[l - 1] * &c[h - l];
        }
        c.push(m);
    }
    c
}

pub fn reduced_irf(fit: &VarFit, horizon: usize) -> Vec<DMatrix<f64>> {
    reduced_irf_from_lags(&fit.lags, fit.n(), horizon)
}

/// Lower-triangular `B` with positive diagonal and `BB' = Σ`.
pub fn cholesky_factor(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = sigma.nrows();
    if sigma.ncols() != n || n == 0 {
        return Err(Error::Input("covariance must be a non-empty square matrix".into()));
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    let scale = sym.amax();
    let min_eig = SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(min_eig > 1e-10 * scale) {
        return Err(Error::Identification(format!(
            "covariance is not positive definite: smallest eigenvalue {min_eig:e}"
        )));
    }
    sym.cholesky().map(|c| c.l()).ok_or_else(|| {
        Error::Identification(format!(
            "Cholesky factorization failed (smallest eigenvalue {min_eig:e})"
        ))
    })
}

/// Structural shock definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Identification {
    /// Cholesky orthogonalization under `ordering` (default: column order);
    /// the shock is the innovation of `impulse`.
    Recursive {
        impulse: String,
        outcome: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ordering: Option<Vec<String>>,
    },
    /// The shock is an observed series, ordered first.
    ObservedShock { shock: String, outcome: String },
    /// The shock is `β'u_t` with weights over the system's columns.
    WeightVector { outcome: String, beta: Vec<f64> },
}

impl Identification {
    pub fn outcome(&self) -> &str {
        match self {
            Identification::Recursive { outcome, .. }
            | Identification::ObservedShock { outcome, .. }
            | Identification::WeightVector { outcome, .. } => outcome,
        }
    }

    /// Name of the impulse variable, when the scheme has one.
    pub fn impulse(&self) -> Option<&str> {
        match self {
            Identification::Recursive { impulse, .. } => Some(impulse),
            Identification::ObservedShock { shock, .. } => Some(shock),
            Identification::WeightVector { .. } => None,
        }
    }

    /// Effective Cholesky ordering for the recursive schemes.
    pub fn ordering(&self, names: &[String]) -> Option<Vec<String>> {
        match self {
            Identification::Recursive { ordering, .. } => {
                Some(ordering.clone().unwrap_or_else(|| names.to_vec()))
            }
            Identification::ObservedShock { shock, .. } => {
                let mut o = vec![shock.clone()];
                o.extend(names.iter().filter(|n| *n != shock).cloned());
                Some(o)
            }
            Identification::WeightVector { .. } => None,
        }
    }
}

/// Scale of the structural shock.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// One standard deviation of the structural shock (the Cholesky column).
    #[default]
    OneSd,
    /// Impulse variable moves by one unit on impact.
    UnitImpulse,
}

/// Impact vector (in the system's column order) and the outcome index.
pub(crate) fn impact_vector(
    sigma: &DMatrix<f64>,
    names: &[String],
    ident: &Identification,
    unit: Normalization,
) -> Result<(DVector<f64>, usize)> {
    let n = names.len();
    let idx = |name: &str| {
        names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let outcome = idx(ident.outcome())?;
    let impact = match ident {
        Identification::Recursive { .. } | Identification::ObservedShock { .. } => {
            let ordering = ident.ordering(names).expect("recursive scheme has an ordering");
            if ordering.len() != n {
                return Err(Error::Identification(format!(
                    "ordering has {} entries but the system has {n} variables",
                    ordering.len()
                )));
            }
            let perm = ordering
                .iter()
                .map(|name| idx(name))
                .collect::<Result<Vec<_>>>()?;
            let mut seen = vec![false; n];
            for &p in &perm {
                if std::mem::replace(&mut seen[p], true) {
                    return Err(Error::Identification(
                        "ordering repeats a variable".to_string(),
                    ));
                }
            }
            let impulse = ident.impulse().expect("recursive scheme has an impulse");
            let k = ordering
                .iter()
                .position(|c| c == impulse)
                .ok_or_else(|| Error::MissingColumn(impulse.to_string()))?;
            let permuted = DMatrix::from_fn(n, n, |i, j| sigma[(perm[i], perm[j])]);
            let b = cholesky_factor(&permuted)?;
            let mut v = DVector::zeros(n);
            for (i, &p) in perm.iter().enumerate() {
                v[p] = b[(i, k)];
            }
            if unit == Normalization::UnitImpulse {
                // b[(k,k)] > 0 by construction
                v /= b[(k, k)];
            }
            v
        }
        Identification::WeightVector { beta, .. } => {
            if beta.len() != n {
                return Err(Error::Input(format!(
                    "beta has length {} but the system has {n} variables",
                    beta.len()
                )));
            }
            let beta = DVector::from_column_slice(beta);
            let v = sigma * &beta;
            if unit == Normalization::UnitImpulse {
                let scale = beta.dot(&v);
                if !(scale.abs() > 1e-14 * sigma.amax() * beta.norm_squared()) {
                    return Err(Error::Normalization(
                        "composite shock has zero impact variance".into(),
                    ));
                }
                v / scale
            } else {
                v
            }
        }
    };
    Ok((impact, outcome))
}

fn structural_path(
    lags: &[DMatrix<f64>],
    sigma: &DMatrix<f64>,
    names: &[String],
    ident: &Identification,
    unit: Normalization,
    horizon: usize,
) -> Result<Vec<f64>> {
    let (impact, outcome) = impact_vector(sigma, names, ident, unit)?;
    let n = names.len();
    // propagate the impact vector directly instead of forming C_h
    let mut path: Vec<DVector<f64>> = Vec::with_capacity(horizon + 1);
    path.push(impact);
    for h in 1..=horizon {
        let mut v = DVector::zeros(n);
        for l in 1..=h.min(lags.len()) {
            v += &lags[l - 1] * &path[h - l];
        }
        path.push(v);
    }
    Ok(path.iter().map(|v| v[outcome]).collect())
}

/// `θ_h = e_y' C_h B e_x` (recursive) or `e_y' C_h Σ β` (weight vector).
pub fn structural_irf(
    fit: &VarFit,
    ident: &Identification,
    horizon: usize,
    unit: Normalization,
) -> Result<IrfResult> {
    let theta = structural_path(&fit.lags, &fit.sigma, &fit.names, ident, unit, horizon)?;
    let mut out = IrfResult::new(theta, METHOD_VAR, fit.p(), vec![fit.effective_t(); horizon + 1]);
    out.notes.extend(fit.warnings.iter().cloned());
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DeltaSe {
    pub se: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Delta-method standard errors from a central-difference Jacobian of θ_h in
/// the stacked (lag coefficients, vech Σ) parameters, with a joint EHW-type
/// covariance of those parameters built from per-observation influence terms.
pub fn var_delta_se(
    fit: &VarFit,
    ident: &Identification,
    horizon: usize,
    unit: Normalization,
) -> Result<DeltaSe> {
    let n = fit.n();
    let p = fit.p();
    let t_eff = fit.effective_t();
    let offset = usize::from(fit.has_intercept);
    let k = fit.design.ncols();
    let n_coef = n * n * p;
    let n_vech = n * (n + 1) / 2;
    let m = n_coef + n_vech;

    // influence terms: T × m, ordered (lag ℓ, equation i, variable j) then vech
    let sigma_vech = vech(&fit.sigma);
    let xq = &fit.design * &fit.xtx_inv;
    let mut psi = DMatrix::zeros(t_eff, m);
    for t in 0..t_eff {
        let u = fit.residuals.row(t);
        for l in 0..p {
            for i in 0..n {
                for j in 0..n {
                    let col = (l * n + i) * n + j;
                    psi[(t, col)] = xq[(t, offset + l * n + j)] * u[i];
                }
            }
        }
        let mut c = n_coef;
        for j in 0..n {
            for i in j..n {
                psi[(t, c)] = (u[i] * u[j] - sigma_vech[c - n_coef]) / t_eff as f64;
                c += 1;
            }
        }
    }
    debug_assert_eq!(k, offset + n * p);
    let cov = psi.transpose() * &psi;

    let mut params = Vec::with_capacity(m);
    for a in &fit.lags {
        for i in 0..n {
            for j in 0..n {
                params.push(a[(i, j)]);
            }
        }
    }
    params.extend_from_slice(&sigma_vech);
    let eval = |theta: &[f64]| -> Result<Vec<f64>> {
        let lags: Vec<DMatrix<f64>> = (0..p)
            .map(|l| DMatrix::from_fn(n, n, |i, j| theta[(l * n + i) * n + j]))
            .collect();
        let sigma = unvech(&theta[n_coef..], n);
        structural_path(&lags, &sigma, &fit.names, ident, unit, horizon)
    };
    eval(&params)?;

    let mut jac = DMatrix::zeros(horizon + 1, m);
    let mut work = params.clone();
    for c in 0..m {
        let step = 1e-6 * (1.0 + params[c].abs());
        work[c] = params[c] + step;
        let up = eval(&work)?;
        work[c] = params[c] - step;
        let down = eval(&work)?;
        work[c] = params[c];
        for h in 0..=horizon {
            jac[(h, c)] = (up[h] - down[h]) / (2.0 * step);
        }
    }
    let var = (&jac * &cov * jac.transpose()).diagonal();
    let mut warnings = Vec::new();
    let min_eig = SymmetricEigen::new(cov.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig <= 1e-12 * cov.amax() {
        warnings.push(format!(
            "parameter covariance is near singular (smallest eigenvalue {min_eig:e})"
        ));
    }
    let se = var
        .iter()
        .map(|v| {
            if *v < 0.0 {
                0.0
            } else {
                v.sqrt()
            }
        })
        .collect();
    Ok(DeltaSe { se, warnings })
}

/// Options for a complete VAR impulse response estimate.
#[derive(Debug, Clone, Copy)]
pub struct VarOptions {
    pub intercept: bool,
    pub bias_correct: bool,
    pub normalization: Normalization,
    /// Compute delta-method SEs and normal intervals at this level.
    pub level: Option<f64>,
}

impl Default for VarOptions {
    fn default() -> Self {
        Self {
            intercept: true,
            bias_correct: true,
            normalization: Normalization::OneSd,
            level: None,
        }
    }
}

/// Fit, optionally Pope-correct, identify, and (optionally) attach delta-method intervals.
pub fn var_estimate(
    data: &Dataset,
    columns: &[String],
    ident: &Identification,
    p: usize,
    horizon: usize,
    opts: VarOptions,
) -> Result<IrfResult> {
    let raw = fit_var(data, columns, p, opts.intercept)?;
    let fit = if opts.bias_correct { pope_correct(&raw) } else { raw };
    let mut out = structural_irf(&fit, ident, horizon, opts.normalization)?;
    if let Some(level) = opts.level {
        let delta = var_delta_se(&fit, ident, horizon, opts.normalization)?;
        out.notes.extend(delta.warnings);
        out.se = Some(delta.se);
        out = out.with_normal_intervals(level, METHOD_VAR_DELTA)?;
    }
    Ok(out)
}
