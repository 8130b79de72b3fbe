//! Closed-form large-sample curves: AR(1) VAR bias under an ARMA(1,1) truth,
//! the worst-case bias bound, VAR interval coverage under bias, the MSE
//! preference rule, and the chance that a VAR estimate leaves the LP interval.

use serde::Serialize;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile; `p` must lie in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // one Newton step against the more accurate CDF
    let d = normal_pdf(x);
    if d > 0.0 && x.is_finite() {
        x - (normal_cdf(x) - p) / d
    } else {
        x
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("level must lie in (0,1), got {level}")))
    }
}

fn check_se_ratio(se_ratio: f64) -> Result<()> {
    if se_ratio > 0.0 && se_ratio <= 1.0 {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "se_ratio = tau_VAR/tau_LP must lie in (0,1], got {se_ratio}"
        )))
    }
}

/// One point in (bias ratio, SE ratio, misspecification, level) space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryPoint {
    /// |b| / τ_VAR
    pub bias_ratio: f64,
    /// τ_VAR / τ_LP
    pub se_ratio: f64,
    /// √(T·M)
    pub sqrt_tm: f64,
    pub level: f64,
}

impl TheoryPoint {
    pub fn validate(&self) -> Result<()> {
        check_se_ratio(self.se_ratio)?;
        check_level(self.level)?;
        if self.bias_ratio < 0.0 || self.sqrt_tm < 0.0 {
            return Err(Error::Input("bias_ratio and sqrt_tm must be non-negative".into()));
        }
        Ok(())
    }

    pub fn coverage(&self) -> Result<f64> {
        coverage_curve(self.bias_ratio, self.level)
    }

    pub fn bias_bound(&self) -> Result<f64> {
        bias_bound(self.sqrt_tm, self.se_ratio)
    }

    pub fn prob_var_outside_lp(&self) -> Result<f64> {
        prob_var_outside_lp(self.sqrt_tm, self.se_ratio, self.level)
    }
}

/// Large-sample bias of the AR(1) impulse response ρ̂^h under ARMA(1,1):
/// `h ρ^{h-1} (1-ρ²) α − ρ^{h-1} α`.
pub fn var_bias_arma1(rho: f64, alpha: f64, h: usize) -> Result<f64> {
    if h == 0 {
        return Err(Error::Input("bias formula holds for h >= 1".into()));
    }
    if rho.abs() >= 1.0 {
        return Err(Error::Input(format!("|rho| must be below 1, got {rho}")));
    }
    let r = rho.powi(h as i32 - 1);
    Ok(h as f64 * r * (1.0 - rho * rho) * alpha - r * alpha)
}

/// Worst-case |bias|/τ_VAR: `√(T·M) · √(1/r² − 1)`.
pub fn bias_bound(sqrt_tm: f64, se_ratio: f64) -> Result<f64> {
    check_se_ratio(se_ratio)?;
    Ok(sqrt_tm * (1.0 / (se_ratio * se_ratio) - 1.0).max(0.0).sqrt())
}

/// Coverage of the nominal `level` VAR interval when bias/SD equals `bias_ratio`.
pub fn coverage_curve(bias_ratio: f64, level: f64) -> Result<f64> {
    check_level(level)?;
    if !(bias_ratio >= 0.0) {
        return Err(Error::Input(format!("bias_ratio must be >= 0, got {bias_ratio}")));
    }
    let z = normal_quantile(0.5 + level / 2.0);
    // upper tail written via the complement for accuracy at large bias
    Ok((normal_cdf(z - bias_ratio) - normal_cdf(-z - bias_ratio)).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseComponents {
    pub mse: f64,
    pub bias_sq: f64,
    pub variance: f64,
}

pub fn mse_components(bias: f64, variance: f64) -> Result<MseComponents> {
    if variance < 0.0 {
        return Err(Error::Input(format!("variance must be >= 0, got {variance}")));
    }
    let bias_sq = bias * bias;
    Ok(MseComponents {
        mse: bias_sq + variance,
        bias_sq,
        variance,
    })
}

/// VAR beats LP on MSE iff `bias_ratio ≤ √(1/r² − 1)` (ties favour the VAR).
pub fn mse_prefers_var(bias_ratio: f64, se_ratio: f64) -> Result<bool> {
    Ok(bias_ratio <= bias_bound(1.0, se_ratio)?)
}

/// Worst-case probability that the VAR estimate falls outside the LP interval:
/// `P(|N(√(T·M), 1)| > z_{1-a/2} / √(1 − r²))`.
///
/// At `se_ratio == 1` the two estimators coincide asymptotically and the
/// probability is 0.
pub fn prob_var_outside_lp(sqrt_tm: f64, se_ratio: f64, level: f64) -> Result<f64> {
    check_se_ratio(se_ratio)?;
    check_level(level)?;
    if se_ratio == 1.0 {
        return Ok(0.0);
    }
    let c = normal_quantile(0.5 + level / 2.0) / (1.0 - se_ratio * se_ratio).sqrt();
    Ok(normal_cdf(-c - sqrt_tm) + normal_cdf(sqrt_tm - c))
}

/// Same probability at a given (not worst-case) bias ratio |b|/τ_VAR:
/// `P(|N(β, 1/r² − 1)| > z_{1-a/2}/r)`.
pub fn prob_var_outside_lp_at_bias(bias_ratio: f64, se_ratio: f64, level: f64) -> Result<f64> {
    check_se_ratio(se_ratio)?;
    check_level(level)?;
    if se_ratio == 1.0 {
        return Ok(0.0);
    }
    let sd = (1.0 / (se_ratio * se_ratio) - 1.0).sqrt();
    let c = normal_quantile(0.5 + level / 2.0) / se_ratio;
    Ok(normal_cdf((-c - bias_ratio) / sd) + normal_cdf((bias_ratio - c) / sd))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageRow {
    pub bias_ratio: f64,
    pub level: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    #[serde(rename = "sqrtTM")]
    pub sqrt_tm: f64,
    pub se_ratio: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutsideRow {
    #[serde(rename = "sqrtTM")]
    pub sqrt_tm: f64,
    pub se_ratio: f64,
    pub level: f64,
    pub prob_outside: f64,
}

/// Evenly spaced grid `lo..=hi` with `steps` intervals.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![lo];
    }
    (0..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .collect()
}

pub fn coverage_grid(bias_ratios: &[f64], levels: &[f64]) -> Result<Vec<CoverageRow>> {
    let mut rows = Vec::with_capacity(bias_ratios.len() * levels.len());
    for &level in levels {
        for &b in bias_ratios {
            rows.push(CoverageRow {
                bias_ratio: b,
                level,
                coverage: coverage_curve(b, level)?,
            });
        }
    }
    Ok(rows)
}

pub fn bound_grid(sqrt_tms: &[f64], se_ratios: &[f64]) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::new();
    for &s in sqrt_tms {
        for &r in se_ratios {
            rows.push(BoundRow {
                sqrt_tm: s,
                se_ratio: r,
                bound: bias_bound(s, r)?,
            });
        }
    }
    Ok(rows)
}

pub fn prob_outside_grid(sqrt_tms: &[f64], se_ratios: &[f64], levels: &[f64]) -> Result<Vec<OutsideRow>> {
    let mut rows = Vec::new();
    for &s in sqrt_tms {
        for &r in se_ratios {
            for &level in levels {
                rows.push(OutsideRow {
                    sqrt_tm: s,
                    se_ratio: r,
                    level,
                    prob_outside: prob_var_outside_lp(s, r, level)?,
                });
            }
        }
    }
    Ok(rows)
}
