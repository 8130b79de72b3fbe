//! Declarative estimator specifications shared by the Monte Carlo harness
//! and the command line.

use serde::{Deserialize, Serialize};

use crate::boot::{lp_percentile_t_ci, var_efron_ci, BootConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::irf::{IrfResult, METHOD_LP_EHW};
use crate::linalg::derive_seed;
use crate::lp::{lp_estimate, lp_estimate_weighted, ControlSet, LpSpec};
use crate::regress::aic_select_var_lag;
use crate::var::{var_estimate, Identification, Normalization, VarOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lp,
    Var,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Inference {
    /// Point estimates (LP keeps its EHW standard errors).
    #[default]
    None,
    /// EHW normal intervals for LP, delta-method intervals for VAR.
    Analytic,
    /// Percentile-t intervals for LP, Efron intervals for VAR.
    Bootstrap,
}

/// Lag length: fixed, or chosen by AIC on a VAR in the estimator's columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LagChoice {
    Fixed(usize),
    Aic { aic: usize },
}

impl LagChoice {
    pub fn resolve(&self, data: &Dataset, columns: &[String]) -> Result<usize> {
        match *self {
            LagChoice::Fixed(p) => Ok(p),
            LagChoice::Aic { aic } => aic_select_var_lag(data, columns, aic),
        }
    }
}

fn yes() -> bool {
    true
}

fn default_level() -> f64 {
    0.90
}

fn unit_impulse() -> Normalization {
    Normalization::UnitImpulse
}

/// One named estimator.
///
/// ```json
/// {"name": "lp4", "method": "lp", "p": 4, "inference": "bootstrap",
///  "identification": {"scheme": "observed_shock", "shock": "__shock", "outcome": "y"},
///  "boot": {"B": 500}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub name: String,
    pub method: Method,
    /// Shock definition; the experiment layer fills in a default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identification: Option<Identification>,
    /// VAR system, or the observables of an LP; the experiment layer fills in a default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
    pub p: LagChoice,
    #[serde(default = "yes")]
    pub bias_correct: bool,
    #[serde(default)]
    pub inference: Inference,
    #[serde(default)]
    pub controls: ControlSet,
    #[serde(default = "unit_impulse")]
    pub normalization: Normalization,
    #[serde(default = "default_level")]
    pub level: f64,
    /// Required for bootstrap inference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boot: Option<BootConfig>,
    /// Lag length of the bootstrap VAR behind LP intervals; defaults to `p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_p: Option<usize>,
}

impl EstimatorSpec {
    pub fn new(name: &str, method: Method, p: usize) -> Self {
        Self {
            name: name.to_string(),
            method,
            identification: None,
            columns: None,
            p: LagChoice::Fixed(p),
            bias_correct: true,
            inference: Inference::None,
            controls: ControlSet::Full,
            normalization: Normalization::UnitImpulse,
            level: default_level(),
            boot: None,
            var_p: None,
        }
    }

    pub fn with_identification(mut self, ident: Identification, columns: &[String]) -> Self {
        self.identification = Some(ident);
        self.columns = Some(columns.to_vec());
        self
    }

    pub fn with_inference(mut self, inference: Inference) -> Self {
        self.inference = inference;
        self
    }

    pub fn with_boot(mut self, boot: BootConfig) -> Self {
        self.inference = Inference::Bootstrap;
        self.boot = Some(boot);
        self
    }

    pub fn with_bias_correction(mut self, on: bool) -> Self {
        self.bias_correct = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Input("estimator name must be non-empty".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Input(format!(
                "estimator '{}': level must lie in (0,1)",
                self.name
            )));
        }
        if matches!(self.p, LagChoice::Fixed(0) | LagChoice::Aic { aic: 0 }) {
            return Err(Error::Input(format!("estimator '{}': p must be at least 1", self.name)));
        }
        if self.inference == Inference::Bootstrap {
            self.boot
                .as_ref()
                .ok_or_else(|| {
                    Error::Input(format!(
                        "estimator '{}': bootstrap inference needs a 'boot' block",
                        self.name
                    ))
                })?
                .validate()?;
        }
        if self.method == Method::Lp && self.normalization != Normalization::UnitImpulse {
            return Err(Error::Input(format!(
                "estimator '{}': LP responses are per unit of the impulse; use unit_impulse",
                self.name
            )));
        }
        Ok(())
    }

    fn parts(&self) -> Result<(&Identification, &[String])> {
        let missing = |what: &str| Error::Input(format!("estimator '{}' has no {what}", self.name));
        Ok((
            self.identification.as_ref().ok_or_else(|| missing("identification"))?,
            self.columns.as_deref().ok_or_else(|| missing("columns"))?,
        ))
    }

    /// LP spec equivalent to this estimator at lag `p`.
    pub fn lp_spec(&self, p: usize, horizon: usize) -> Result<LpSpec> {
        let (ident, columns) = self.parts()?;
        Ok(LpSpec::from_identification(ident, columns, self.controls, p, horizon)?
            .with_bias_correction(self.bias_correct))
    }

    /// Runs the estimator. `seed` drives bootstrap draws; `None` keeps the
    /// seed of the `boot` block.
    pub fn estimate(&self, data: &Dataset, horizon: usize, seed: Option<u64>) -> Result<IrfResult> {
        self.validate()?;
        let (ident, columns) = self.parts()?;
        for c in columns {
            data.column(c)?;
        }
        let p = self.p.resolve(data, columns)?;
        // the estimator's level governs every interval it reports
        let boot = self.boot.map(|mut b| {
            b.level = self.level;
            if let Some(s) = seed {
                b.seed = derive_seed(s, b.seed);
            }
            b
        });
        match self.method {
            Method::Lp => {
                let spec = self.lp_spec(p, horizon)?;
                match (self.inference, ident) {
                    (Inference::Bootstrap, Identification::WeightVector { .. }) => Err(Error::Input(format!(
                        "estimator '{}': bootstrap LP intervals need an observed or recursive impulse",
                        self.name
                    ))),
                    (Inference::Bootstrap, _) => {
                        let cfg = boot.expect("validated");
                        lp_percentile_t_ci(data, &spec, self.var_p.unwrap_or(p), &cfg)
                    }
                    (inference, ident) => {
                        let est = match ident {
                            Identification::WeightVector { beta, .. } => lp_estimate_weighted(data, beta, &spec)?,
                            _ => lp_estimate(data, &spec)?,
                        };
                        if inference == Inference::Analytic {
                            est.with_normal_intervals(self.level, METHOD_LP_EHW)
                        } else {
                            Ok(est)
                        }
                    }
                }
            }
            Method::Var => match self.inference {
                Inference::Bootstrap => {
                    let cfg = boot.expect("validated");
                    var_efron_ci(data, columns, ident, p, horizon, self.normalization, &cfg)
                }
                inference => {
                    let opts = VarOptions {
                        intercept: true,
                        bias_correct: self.bias_correct,
                        normalization: self.normalization,
                        level: (inference == Inference::Analytic).then_some(self.level),
                    };
                    var_estimate(data, columns, ident, p, horizon, opts)
                }
            },
        }
    }
}

/// Per-horizon `|θ̂_LP − θ̂_VAR| / se_VAR`.
pub fn scaled_difference(lp: &IrfResult, var: &IrfResult) -> Result<Vec<f64>> {
    let se = var
        .se
        .as_ref()
        .ok_or_else(|| Error::Input("scaled difference needs VAR standard errors".into()))?;
    let n = lp.len().min(var.len());
    Ok((0..n).map(|h| (lp.theta[h] - var.theta[h]).abs() / se[h]).collect())
}

/// Per-horizon `se_VAR / se_LP`.
pub fn se_ratio(lp: &IrfResult, var: &IrfResult) -> Result<Vec<f64>> {
    let (Some(l), Some(v)) = (lp.se.as_ref(), var.se.as_ref()) else {
        return Err(Error::Input("standard error ratio needs both standard errors".into()));
    };
    let n = l.len().min(v.len());
    Ok((0..n).map(|h| v[h] / l[h]).collect())
}

/// A batch of estimators applied to one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    /// Largest horizon H.
    pub horizon: usize,
    pub estimators: Vec<EstimatorSpec>,
}

impl EstimateConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(Error::Input("at least one estimator is required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.estimators {
            if !seen.insert(e.name.as_str()) {
                return Err(Error::Input(format!("duplicate estimator name '{}'", e.name)));
            }
            if e.name.contains(['/', '\\']) {
                return Err(Error::Input(format!("estimator name '{}' must not contain path separators", e.name)));
            }
            e.validate()?;
            e.parts()?;
        }
        Ok(())
    }

    /// Estimates every estimator in order. With a seed, estimator `i`
    /// bootstraps from `derive_seed(seed, i)`.
    pub fn run(&self, data: &Dataset, seed: Option<u64>) -> Result<Vec<(String, IrfResult)>> {
        self.validate()?;
        self.estimators
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let s = seed.map(|s| derive_seed(s, i as u64));
                Ok((e.name.clone(), e.estimate(data, self.horizon, s)?))
            })
            .collect()
    }
}

/// `|θ̂_LP − θ̂_VAR| / se_VAR` for one LP/VAR pair at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisagreementRow {
    pub horizon: usize,
    pub lp: String,
    pub var: String,
    pub theta_lp: f64,
    pub theta_var: f64,
    pub se_var: Option<f64>,
    pub scaled_diff: Option<f64>,
}

/// Rows for every (LP, VAR) pair among `results`, keyed by estimator method.
pub fn disagreement(specs: &[EstimatorSpec], results: &[(String, IrfResult)]) -> Vec<DisagreementRow> {
    let of = |m: Method| -> Vec<&(String, IrfResult)> {
        results
            .iter()
            .filter(|(name, _)| specs.iter().any(|s| &s.name == name && s.method == m))
            .collect()
    };
    let mut rows = Vec::new();
    for (ln, l) in of(Method::Lp) {
        for (vn, v) in of(Method::Var) {
            for h in 0..l.len().min(v.len()) {
                let se = v.se.as_ref().map(|s| s[h]);
                rows.push(DisagreementRow {
                    horizon: h,
                    lp: ln.clone(),
                    var: vn.clone(),
                    theta_lp: l.theta[h],
                    theta_var: v.theta[h],
                    se_var: se,
                    scaled_diff: se.filter(|s| *s > 0.0).map(|s| (l.theta[h] - v.theta[h]).abs() / s),
                });
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boot::BlockLength;
    use crate::dgp::{simulate, DgpSpec, SHOCK_COLUMN};
    use crate::irf::{METHOD_LP, METHOD_LP_BOOT_T, METHOD_VAR_DELTA};

    fn own() -> (Identification, Vec<String>) {
        (
            Identification::Recursive {
                impulse: "y".into(),
                outcome: "y".into(),
                ordering: None,
            },
            vec!["y".to_string()],
        )
    }

    #[test]
    fn json_round_trip_with_defaults() {
        let spec: EstimatorSpec = serde_json::from_str(
            r#"{"name": "v", "method": "var", "p": {"aic": 6}, "inference": "analytic",
                "identification": {"scheme": "observed_shock", "shock": "__shock", "outcome": "y"},
                "columns": ["__shock", "y"]}"#,
        )
        .unwrap();
        assert_eq!(spec.p, LagChoice::Aic { aic: 6 });
        assert!(spec.bias_correct);
        assert_eq!(spec.normalization, Normalization::UnitImpulse);
        let back: EstimatorSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn validation_messages() {
        let (ident, cols) = own();
        let base = EstimatorSpec::new("a", Method::Lp, 1).with_identification(ident, &cols);
        assert!(base.validate().is_ok());
        let mut bad = base.clone();
        bad.inference = Inference::Bootstrap;
        assert!(bad.validate().unwrap_err().to_string().contains("boot"));
        let mut bad = base.clone();
        bad.normalization = Normalization::OneSd;
        assert!(bad.validate().is_err());
        assert!(EstimatorSpec::new("a", Method::Var, 0).validate().is_err());
    }

    #[test]
    fn lp_and_var_share_impact_under_unit_impulse() {
        let dgp = DgpSpec::Varma {
            a: vec![vec![vec![0.5, 0.1], vec![0.2, 0.4]]],
            theta: vec![],
            sigma: vec![vec![1.0, 0.3], vec![0.3, 1.0]],
            burn_in: 100,
            names: Some(vec!["y".into(), "z".into()]),
            shock_weight: None,
        };
        let data = simulate(&dgp, 240, 4).unwrap();
        let cols = vec![SHOCK_COLUMN.to_string(), "y".to_string()];
        let ident = Identification::ObservedShock {
            shock: SHOCK_COLUMN.into(),
            outcome: "y".into(),
        };
        let lp = EstimatorSpec::new("lp", Method::Lp, 1)
            .with_identification(ident.clone(), &cols)
            .with_bias_correction(false)
            .estimate(&data, 6, None)
            .unwrap();
        let var = EstimatorSpec::new("var", Method::Var, 1)
            .with_identification(ident, &cols)
            .with_bias_correction(false)
            .with_inference(Inference::Analytic)
            .estimate(&data, 6, None)
            .unwrap();
        assert_eq!(lp.method, METHOD_LP);
        assert_eq!(var.method, METHOD_VAR_DELTA);
        assert!((lp.theta[0] - var.theta[0]).abs() < 1e-8);
        assert_eq!(scaled_difference(&lp, &var).unwrap()[0], (lp.theta[0] - var.theta[0]).abs() / var.se.as_ref().unwrap()[0]);
        assert_eq!(se_ratio(&lp, &var).unwrap().len(), 7);
    }

    #[test]
    fn bootstrap_seed_override_changes_draws() {
        let data = simulate(&DgpSpec::arma11(0.5, 0.0, 1.0), 200, 5).unwrap();
        let (ident, cols) = own();
        let boot = BootConfig {
            replications: 100,
            block_len: BlockLength::default(),
            level: 0.9,
            seed: 3,
        };
        let spec = EstimatorSpec::new("b", Method::Lp, 1).with_identification(ident, &cols).with_boot(boot);
        let a = spec.estimate(&data, 4, None).unwrap();
        let b = spec.estimate(&data, 4, Some(9)).unwrap();
        let c = spec.estimate(&data, 4, Some(9)).unwrap();
        assert_eq!(a.method, METHOD_LP_BOOT_T);
        assert_eq!(b, c);
        assert_ne!(a.ci_lo, b.ci_lo);
    }
}
