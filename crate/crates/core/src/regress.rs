//! Dense least squares with Eicker-Huber-White covariance, lag designs, and
//! AIC lag selection for reduced-form VARs.

use std::fmt;

use nalgebra::{DMatrix, DVector, SVD};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Relative singular-value threshold below which a design counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares fit of every column of `Y` on the same regressors `X`.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// regressors × equations
    pub coefficients: DMatrix<f64>,
    /// effective sample × equations
    pub residuals: DMatrix<f64>,
    /// One coefficient covariance matrix per equation. EHW (HC0) when `robust`,
    /// otherwise the classical `s² (X'X)⁻¹` with a degrees-of-freedom correction.
    pub vcov: Vec<DMatrix<f64>>,
    /// `(X'X)⁻¹`, kept for sandwich constructions downstream.
    pub xtx_inv: DMatrix<f64>,
    pub effective_t: usize,
    pub robust: bool,
}

impl OlsFit {
    /// Standard error of coefficient `k` in equation `eq`.
    pub fn se(&self, k: usize, eq: usize) -> f64 {
        self.vcov[eq][(k, k)].max(0.0).sqrt()
    }
}

/// OLS of `y` on `x`, equation by equation, via a column-equilibrated SVD.
pub fn ols_fit(y: &DMatrix<f64>, x: &DMatrix<f64>, robust: bool) -> Result<OlsFit> {
    ols_fit_labeled(y, x, robust, None)
}

/// Like [`ols_fit`] but names design columns in singular-design errors.
pub fn ols_fit_labeled(
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    robust: bool,
    labels: Option<&[String]>,
) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.nrows() != n {
        return Err(Error::Input(format!(
            "Y has {} rows but X has {n}",
            y.nrows()
        )));
    }
    if k == 0 {
        return Err(Error::Input("design has no columns".into()));
    }
    if n < k {
        return Err(Error::InsufficientSample {
            needed: k,
            available: n,
        });
    }
    let label = |j: usize| -> String {
        labels
            .and_then(|l| l.get(j).cloned())
            .unwrap_or_else(|| format!("x{j}"))
    };

    let norms: Vec<f64> = (0..k).map(|j| x.column(j).norm()).collect();
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    let zero_cols: Vec<String> = norms
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= RANK_TOLERANCE * max_norm.max(f64::MIN_POSITIVE))
        .map(|(j, _)| label(j))
        .collect();
    if !zero_cols.is_empty() {
        return Err(Error::SingularDesign { columns: zero_cols });
    }
    let mut xs = x.clone();
    for (j, &s) in norms.iter().enumerate() {
        xs.column_mut(j).scale_mut(1.0 / s);
    }

    let svd = SVD::new(xs, true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let s = &svd.singular_values;
    let (s_max, s_min, i_min) = s.iter().enumerate().fold(
        (0.0f64, f64::INFINITY, 0usize),
        |(mx, mn, im), (i, &v)| (mx.max(v), if v < mn { v } else { mn }, if v < mn { i } else { im }),
    );
    if s_min < RANK_TOLERANCE * s_max {
        let null_dir = v_t.row(i_min);
        let peak = null_dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let columns = (0..k)
            .filter(|&j| null_dir[j].abs() >= 0.2 * peak)
            .map(label)
            .collect();
        return Err(Error::SingularDesign { columns });
    }

    let d_inv = DVector::from_iterator(k, norms.iter().map(|v| 1.0 / v));
    // V S⁻¹ with the column scaling folded back in
    let mut v_sinv = v_t.transpose();
    for i in 0..k {
        v_sinv.column_mut(i).scale_mut(1.0 / s[i]);
    }
    for j in 0..k {
        v_sinv.row_mut(j).scale_mut(d_inv[j]);
    }
    let coefficients = &v_sinv * (u.transpose() * y);
    let xtx_inv = &v_sinv * v_sinv.transpose();
    let residuals = y - x * &coefficients;

    let vcov = (0..y.ncols())
        .map(|eq| {
            let e = residuals.column(eq);
            if robust {
                let mut xe = x.clone();
                for t in 0..n {
                    xe.row_mut(t).scale_mut(e[t]);
                }
                let meat = xe.transpose() * &xe;
                &xtx_inv * meat * &xtx_inv
            } else {
                let dof = (n - k).max(1) as f64;
                &xtx_inv * (e.norm_squared() / dof)
            }
        })
        .collect();

    Ok(OlsFit {
        coefficients,
        residuals,
        vcov,
        xtx_inv,
        effective_t: n,
        robust,
    })
}

/// Identity of one column of a lag design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DesignColumn {
    Intercept,
    Current(String),
    Lag(String, usize),
}

impl fmt::Display for DesignColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignColumn::Intercept => write!(f, "const"),
            DesignColumn::Current(name) => write!(f, "{name}"),
            DesignColumn::Lag(name, l) => write!(f, "{name}_L{l}"),
        }
    }
}

/// Regressor matrix aligning values at time `t` with lags `t-1..t-p`.
///
/// Row `i` corresponds to time index `first_t + i` (0-based). Columns are ordered
/// intercept, contemporaneous regressors, then lag blocks `1..=p`, each block
/// listing the lagged variables in the order given.
#[derive(Debug, Clone)]
pub struct LagDesign {
    /// Values of the lagged variables at time `t`, the natural VAR left-hand side.
    pub y: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub index_map: Vec<DesignColumn>,
    pub first_t: usize,
}

impl LagDesign {
    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn labels(&self) -> Vec<String> {
        self.index_map.iter().map(ToString::to_string).collect()
    }

    pub fn position(&self, col: &DesignColumn) -> Option<usize> {
        self.index_map.iter().position(|c| c == col)
    }
}

pub fn build_lag_design(
    data: &Dataset,
    contemporaneous: &[String],
    lagged: &[String],
    p: usize,
    intercept: bool,
) -> Result<LagDesign> {
    build_lag_design_from(data, contemporaneous, lagged, p, intercept, p)
}

/// Lag design whose first row is time `first_t` (must be at least `p`).
pub fn build_lag_design_from(
    data: &Dataset,
    contemporaneous: &[String],
    lagged: &[String],
    p: usize,
    intercept: bool,
    first_t: usize,
) -> Result<LagDesign> {
    let t_len = data.len();
    if p >= t_len || first_t >= t_len {
        return Err(Error::InsufficientSample {
            needed: p.max(first_t) + 1,
            available: t_len,
        });
    }
    if first_t < p {
        return Err(Error::Input(format!(
            "design cannot start at t={first_t} with {p} lags"
        )));
    }
    let current: Vec<&[f64]> = contemporaneous
        .iter()
        .map(|c| data.column(c))
        .collect::<Result<_>>()?;
    let lag_cols: Vec<&[f64]> = lagged
        .iter()
        .map(|c| data.column(c))
        .collect::<Result<_>>()?;

    let mut index_map = Vec::new();
    if intercept {
        index_map.push(DesignColumn::Intercept);
    }
    index_map.extend(contemporaneous.iter().map(|c| DesignColumn::Current(c.clone())));
    for l in 1..=p {
        index_map.extend(lagged.iter().map(|c| DesignColumn::Lag(c.clone(), l)));
    }

    let rows = t_len - first_t;
    let k = index_map.len();
    let x = DMatrix::from_fn(rows, k, |i, j| {
        let t = first_t + i;
        let mut j = j;
        if intercept {
            if j == 0 {
                return 1.0;
            }
            j -= 1;
        }
        if j < current.len() {
            return current[j][t];
        }
        j -= current.len();
        let lag = j / lagged.len() + 1;
        lag_cols[j % lagged.len()][t - lag]
    });
    let y = DMatrix::from_fn(rows, lagged.len(), |i, j| lag_cols[j][first_t + i]);
    Ok(LagDesign {
        y,
        x,
        index_map,
        first_t,
    })
}

/// Log determinant of an SPD matrix; `None` when it is not positive definite.
pub(crate) fn log_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    Some(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// AIC value of every candidate lag `1..=p_max` on the common sample `t = p_max+1..T`.
pub fn aic_values(data: &Dataset, columns: &[String], p_max: usize) -> Result<Vec<f64>> {
    let n = columns.len();
    if p_max == 0 {
        return Err(Error::Input("p_max must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Input("AIC selection needs at least one column".into()));
    }
    let needed = p_max * n + n + 1;
    if data.len() <= needed {
        return Err(Error::InsufficientSample {
            needed,
            available: data.len(),
        });
    }
    (1..=p_max)
        .map(|p| {
            let design = build_lag_design_from(data, &[], columns, p, true, p_max)?;
            let fit = ols_fit_labeled(&design.y, &design.x, false, Some(&design.labels()))?;
            let t_eff = fit.effective_t as f64;
            let sigma = fit.residuals.transpose() * &fit.residuals / t_eff;
            let log_det = log_det_spd(&sigma).ok_or_else(|| Error::SingularDesign {
                columns: columns.to_vec(),
            })?;
            Ok(log_det + 2.0 * ((n * n * p + n) as f64) / t_eff)
        })
        .collect()
}

/// Lag length minimizing AIC over `1..=p_max`; ties go to the smaller lag.
pub fn aic_select_var_lag(data: &Dataset, columns: &[String], p_max: usize) -> Result<usize> {
    let values = aic_values(data, columns, p_max)?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    Ok(best + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn two_by_two_normal_equations() {
        let y = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        let fit = ols_fit(&y, &x, true).unwrap();
        assert_abs_diff_eq!(fit.coefficients[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.coefficients[(1, 0)], 1.0, epsilon = 1e-12);
        assert!(fit.residuals.amax() < 1e-12);
    }

    #[test]
    fn constant_series_on_intercept() {
        let y = DMatrix::from_element(3, 1, 5.0);
        let x = DMatrix::from_element(3, 1, 1.0);
        let fit = ols_fit(&y, &x, false).unwrap();
        assert_abs_diff_eq!(fit.coefficients[(0, 0)], 5.0, epsilon = 1e-12);
        assert!(fit.residuals.amax() < 1e-12);
    }

    #[test]
    fn ehw_matches_hand_sandwich() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 4.0]);
        let y = DMatrix::from_column_slice(4, 1, &[0.0, 2.0, 1.0, 5.0]);
        let fit = ols_fit(&y, &x, true).unwrap();
        let xtx_inv = (x.transpose() * &x).try_inverse().unwrap();
        let b = &xtx_inv * x.transpose() * &y;
        let e = &y - &x * &b;
        let mut meat = DMatrix::zeros(2, 2);
        for t in 0..4 {
            let xt = x.row(t).transpose();
            meat += &xt * xt.transpose() * e[t].powi(2);
        }
        let v = &xtx_inv * meat * &xtx_inv;
        assert!((&fit.vcov[0] - v).amax() < 1e-12);
    }

    #[test]
    fn collinear_columns_are_named() {
        let x = DMatrix::from_row_slice(4, 3, &[1.0, 1.0, 2.0, 1.0, 2.0, 4.0, 1.0, 3.0, 6.0, 1.0, 5.0, 10.0]);
        let y = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let labels = names(&["const", "a", "b"]);
        match ols_fit_labeled(&y, &x, true, Some(&labels)) {
            Err(Error::SingularDesign { columns }) => {
                assert!(columns.contains(&"a".to_string()));
                assert!(columns.contains(&"b".to_string()));
                assert!(!columns.contains(&"const".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let y = DMatrix::zeros(3, 1);
        let x = DMatrix::from_element(4, 1, 1.0);
        assert!(matches!(ols_fit(&y, &x, true), Err(Error::Input(_))));
    }

    #[test]
    fn lag_design_shapes() {
        let ds = Dataset::new(vec![("a".into(), vec![1.0, 2.0, 3.0, 4.0, 5.0])]).unwrap();
        let d = build_lag_design(&ds, &[], &names(&["a"]), 2, true).unwrap();
        assert_eq!(d.rows(), 3);
        assert_eq!(d.x.ncols(), 3);
        // row 0 is t=2: [1, a_{1}, a_{0}]
        assert_eq!(d.x.row(0).iter().cloned().collect::<Vec<_>>(), vec![1.0, 2.0, 1.0]);
        assert_eq!(d.y[(0, 0)], 3.0);
        assert_eq!(d.index_map[2], DesignColumn::Lag("a".into(), 2));

        let d0 = build_lag_design(&ds, &[], &[], 0, true).unwrap();
        assert_eq!(d0.x.shape(), (5, 1));
        assert!(d0.x.iter().all(|&v| v == 1.0));

        let short = Dataset::new(vec![("a".into(), vec![1.0; 4])]).unwrap();
        assert!(matches!(
            build_lag_design(&short, &[], &names(&["a"]), 4, true),
            Err(Error::InsufficientSample { .. })
        ));
    }

    #[test]
    fn aic_single_candidate() {
        let vals: Vec<f64> = (0..50).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let ds = Dataset::new(vec![("a".into(), vals)]).unwrap();
        assert_eq!(aic_select_var_lag(&ds, &names(&["a"]), 1).unwrap(), 1);
    }
}
