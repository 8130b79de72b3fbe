//! Per-horizon impulse response estimates and their CSV form.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::theory::normal_quantile;

pub const METHOD_LP: &str = "lp";
pub const METHOD_LP_EHW: &str = "lp_ehw";
pub const METHOD_LP_BOOT_T: &str = "lp_boot_t";
pub const METHOD_VAR: &str = "var";
pub const METHOD_VAR_DELTA: &str = "var_delta";
pub const METHOD_VAR_EFRON: &str = "var_efron";

/// Header of the IRF CSV schema.
pub const CSV_COLUMNS: [&str; 7] = ["horizon", "theta", "se", "ci_lo", "ci_hi", "method", "p"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrfResult {
    pub horizons: Vec<usize>,
    pub theta: Vec<f64>,
    pub se: Option<Vec<f64>>,
    pub ci_lo: Option<Vec<f64>>,
    pub ci_hi: Option<Vec<f64>>,
    pub method: String,
    /// Lag length used.
    pub p: usize,
    /// Observations behind each horizon's estimate.
    pub n_obs: Vec<usize>,
    /// Additive bias correction applied at each horizon, when one was.
    pub correction: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

impl IrfResult {
    pub fn new(theta: Vec<f64>, method: &str, p: usize, n_obs: Vec<usize>) -> Self {
        Self {
            horizons: (0..theta.len()).collect(),
            theta,
            se: None,
            ci_lo: None,
            ci_hi: None,
            method: method.to_string(),
            p,
            n_obs,
            correction: None,
            notes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn max_horizon(&self) -> Option<usize> {
        self.horizons.last().copied()
    }

    /// Symmetric normal intervals `θ ± z_{1-a/2}·se`.
    pub fn with_normal_intervals(mut self, level: f64, method: &str) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Input(format!("level must lie in (0,1), got {level}")));
        }
        let se = self
            .se
            .as_ref()
            .ok_or_else(|| Error::Input("normal intervals need standard errors".into()))?;
        let z = normal_quantile(0.5 + level / 2.0);
        self.ci_lo = Some(self.theta.iter().zip(se).map(|(t, s)| t - z * s).collect());
        self.ci_hi = Some(self.theta.iter().zip(se).map(|(t, s)| t + z * s).collect());
        self.method = method.to_string();
        Ok(self)
    }

    /// Width `ci_hi - ci_lo` per horizon, when intervals exist.
    pub fn ci_width(&self) -> Option<Vec<f64>> {
        let lo = self.ci_lo.as_ref()?;
        let hi = self.ci_hi.as_ref()?;
        Some(hi.iter().zip(lo).map(|(h, l)| h - l).collect())
    }

    pub fn covers(&self, h: usize, value: f64) -> Option<bool> {
        let lo = self.ci_lo.as_ref()?.get(h)?;
        let hi = self.ci_hi.as_ref()?.get(h)?;
        Some(*lo <= value && value <= *hi)
    }

    /// Writes `horizon,theta,se,ci_lo,ci_hi,method,p`; absent values are empty fields.
    pub fn write_csv<W: Write>(&self, writer: W, header_comment: Option<&str>) -> Result<()> {
        let mut writer = writer;
        if let Some(comment) = header_comment {
            writeln!(writer, "# {comment}")?;
        }
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(CSV_COLUMNS)?;
        let opt = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map_or(String::new(), |v| v[i].to_string());
        for i in 0..self.len() {
            wtr.write_record([
                self.horizons[i].to_string(),
                self.theta[i].to_string(),
                opt(&self.se, i),
                opt(&self.ci_lo, i),
                opt(&self.ci_hi, i),
                self.method.clone(),
                self.p.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_schema_and_empty_fields() {
        let mut r = IrfResult::new(vec![1.0, 0.5], METHOD_LP, 2, vec![10, 9]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "horizon,theta,se,ci_lo,ci_hi,method,p\n0,1,,,,lp,2\n1,0.5,,,,lp,2\n"
        );

        r.se = Some(vec![0.1, 0.2]);
        let r = r.with_normal_intervals(0.90, METHOD_LP_EHW).unwrap();
        let lo = r.ci_lo.as_ref().unwrap();
        let hi = r.ci_hi.as_ref().unwrap();
        assert!((hi[0] - 1.0 - 0.1 * 1.6448536269514722).abs() < 1e-9);
        assert!(lo[1] <= r.theta[1] && r.theta[1] <= hi[1]);
        assert_eq!(r.covers(0, 1.0), Some(true));
    }
}
