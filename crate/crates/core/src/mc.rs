//! Deterministic parallel Monte Carlo experiments over simulated datasets.
//!
//! Replication `r` simulates its dataset from `derive_seed(base_seed, r)`;
//! every estimator sees that same dataset, and results are merged in
//! replication order, so reports do not depend on the number of workers.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boot::quantile_type7;
use crate::dgp::{simulate, DgpSpec, ARMA_OUTCOME, SHOCK_COLUMN};
use crate::error::{Error, Result};
use crate::estimator::{scaled_difference, se_ratio, EstimatorSpec, Method};
use crate::irf::IrfResult;
use crate::linalg::derive_seed;
use crate::var::Identification;

/// Version string baked in at build time (`git describe` when available).
pub const VERSION: &str = env!("IRFLAB_VERSION");

/// Largest tolerated share of failed replications per estimator.
pub const MAX_FAILURE_SHARE: f64 = 0.01;

/// Hex SHA-256 of a byte string.
pub fn config_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Header comment carried by every output file.
pub fn header_line(hash: &str) -> String {
    format!("irflab {VERSION} config={hash}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSpec {
    pub outcome: String,
    /// Explicit true responses; computed from the DGP when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

/// An LP/VAR pair whose estimates are compared replication by replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lp: String,
    pub var: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dgp: DgpSpec,
    #[serde(rename = "T")]
    pub t: usize,
    pub reps: usize,
    /// Largest horizon H; horizons are `0..=H`.
    pub horizon: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Worker threads; `None` uses the global pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Defaults to `y` for ARMA and the first variable of a VARMA.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthSpec>,
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default)]
    pub comparisons: Vec<Comparison>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        if self.reps == 0 {
            return Err(Error::Input("reps must be at least 1".into()));
        }
        if self.t == 0 {
            return Err(Error::Input("T must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Input("at least one estimator is required".into()));
        }
        let mut names = HashSet::new();
        for e in &self.estimators {
            if !names.insert(e.name.as_str()) {
                return Err(Error::Input(format!("duplicate estimator name '{}'", e.name)));
            }
            e.validate()?;
        }
        for c in &self.comparisons {
            for (name, method) in [(&c.lp, Method::Lp), (&c.var, Method::Var)] {
                let e = self
                    .estimators
                    .iter()
                    .find(|e| &e.name == name)
                    .ok_or_else(|| Error::Input(format!("comparison names unknown estimator '{name}'")))?;
                if e.method != method {
                    return Err(Error::Input(format!(
                        "comparison expects '{name}' to be a {method:?} estimator"
                    )));
                }
            }
        }
        if let Some(values) = self.truth.as_ref().and_then(|t| t.values.as_ref()) {
            if values.len() != self.horizon + 1 {
                return Err(Error::Input(format!(
                    "truth has {} values but horizons run 0..={}",
                    values.len(),
                    self.horizon
                )));
            }
        }
        Ok(())
    }

    pub fn outcome(&self) -> Result<String> {
        match &self.truth {
            Some(t) => Ok(t.outcome.clone()),
            None => Ok(self.dgp.variable_names()?[0].clone()),
        }
    }

    pub fn true_irf(&self) -> Result<Vec<f64>> {
        match self.truth.as_ref().and_then(|t| t.values.clone()) {
            Some(v) => Ok(v),
            None => Ok(self.dgp.true_irf(&self.outcome()?, self.horizon)?.values),
        }
    }

    /// Estimators with default identification and columns filled in:
    /// own-shock recursive on `y` for ARMA, observed `__shock` over every
    /// variable for VARMA.
    pub fn resolved_estimators(&self) -> Result<Vec<EstimatorSpec>> {
        let outcome = self.outcome()?;
        let (ident, columns) = match &self.dgp {
            DgpSpec::Arma11 { .. } => (
                Identification::Recursive {
                    impulse: ARMA_OUTCOME.into(),
                    outcome: outcome.clone(),
                    ordering: None,
                },
                vec![ARMA_OUTCOME.to_string()],
            ),
            DgpSpec::Varma { .. } => {
                let mut cols = vec![SHOCK_COLUMN.to_string()];
                cols.extend(self.dgp.variable_names()?);
                (
                    Identification::ObservedShock {
                        shock: SHOCK_COLUMN.into(),
                        outcome: outcome.clone(),
                    },
                    cols,
                )
            }
        };
        Ok(self
            .estimators
            .iter()
            .map(|e| {
                let mut e = e.clone();
                if e.identification.is_none() {
                    e.identification = Some(ident.clone());
                }
                if e.columns.is_none() {
                    e.columns = Some(columns.clone());
                }
                e
            })
            .collect())
    }

    /// SHA-256 of the canonical JSON form, ignoring the worker hint.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        config_hash(&serde_json::to_vec(&c).expect("config serializes"))
    }
}

/// Summary statistics of one estimator at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStats {
    pub estimator: String,
    pub method: String,
    pub horizon: usize,
    pub truth: f64,
    /// Successful replications.
    pub n: usize,
    pub mean: f64,
    pub bias: f64,
    /// Population standard deviation over replications.
    pub sd: f64,
    pub mse: f64,
    /// Monte Carlo standard error of the bias, `sd/√n`.
    pub mc_se_bias: f64,
    pub coverage: Option<f64>,
    pub mc_se_coverage: Option<f64>,
    pub median_ci_width: Option<f64>,
    pub median_se: Option<f64>,
}

/// Replication-by-replication LP/VAR comparison at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonStats {
    pub lp: String,
    pub var: String,
    pub horizon: usize,
    pub n: usize,
    /// Median of `se_VAR / se_LP`.
    pub median_se_ratio: Option<f64>,
    /// Median of `|θ̂_LP − θ̂_VAR| / se_VAR`.
    pub median_scaled_diff: Option<f64>,
    pub var_in_lp_share: Option<f64>,
    pub var_outside_lp_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureEntry {
    pub estimator: String,
    pub failures: usize,
    pub first_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub truth: Vec<f64>,
    pub cells: Vec<CellStats>,
    pub comparisons: Vec<ComparisonStats>,
    pub failures: Vec<FailureEntry>,
    /// Point estimates per estimator and replication (`None` when it failed).
    #[serde(skip)]
    pub estimates: Vec<(String, Vec<Option<Vec<f64>>>)>,
}

impl McReport {
    pub fn cell(&self, estimator: &str, horizon: usize) -> Option<&CellStats> {
        self.cells
            .iter()
            .find(|c| c.estimator == estimator && c.horizon == horizon)
    }

    pub fn comparison(&self, lp: &str, var: &str, horizon: usize) -> Option<&ComparisonStats> {
        self.comparisons
            .iter()
            .find(|c| c.lp == lp && c.var == var && c.horizon == horizon)
    }

    /// Tidy CSV: `estimator,horizon,statistic,value`, comparisons keyed as `lp|var`.
    pub fn write_tidy_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_tidy(writer, &self.config_hash, &[(None, self)])
    }

    /// Per-replication estimates: `rep,estimator,horizon,theta,truth`.
    pub fn write_estimates_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "# {}", header_line(&self.config_hash))?;
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["rep", "estimator", "horizon", "theta", "truth"])?;
        for (name, reps) in &self.estimates {
            for (r, est) in reps.iter().enumerate() {
                let Some(theta) = est else { continue };
                for (h, v) in theta.iter().enumerate() {
                    wtr.write_record([
                        r.to_string(),
                        name.clone(),
                        h.to_string(),
                        v.to_string(),
                        self.truth[h].to_string(),
                    ])?;
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_summary_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

fn write_tidy<W: Write>(mut writer: W, hash: &str, reports: &[(Option<&str>, &McReport)]) -> Result<()> {
    writeln!(writer, "# {}", header_line(hash))?;
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["group", "estimator", "horizon", "statistic", "value"])?;
    for (group, report) in reports {
        let group = group.unwrap_or("");
        for c in &report.cells {
            let stats = [
                ("truth", Some(c.truth)),
                ("n", Some(c.n as f64)),
                ("mean", Some(c.mean)),
                ("bias", Some(c.bias)),
                ("sd", Some(c.sd)),
                ("mse", Some(c.mse)),
                ("mc_se_bias", Some(c.mc_se_bias)),
                ("coverage", c.coverage),
                ("mc_se_coverage", c.mc_se_coverage),
                ("median_ci_width", c.median_ci_width),
                ("median_se", c.median_se),
            ];
            for (stat, v) in stats {
                if let Some(v) = v {
                    wtr.write_record([group, &c.estimator, &c.horizon.to_string(), stat, &v.to_string()])?;
                }
            }
        }
        for c in &report.comparisons {
            let key = format!("{}|{}", c.lp, c.var);
            let stats = [
                ("median_se_ratio", c.median_se_ratio),
                ("median_scaled_diff", c.median_scaled_diff),
                ("var_in_lp_share", c.var_in_lp_share),
                ("var_outside_lp_share", c.var_outside_lp_share),
            ];
            for (stat, v) in stats {
                if let Some(v) = v {
                    wtr.write_record([group, &key, &c.horizon.to_string(), stat, &v.to_string()])?;
                }
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Median of the finite entries.
fn median(v: Vec<f64>) -> Option<f64> {
    let mut v: Vec<f64> = v.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(quantile_type7(&v, 0.5))
}

type RepOutcome = std::result::Result<IrfResult, String>;

fn run_one(spec: &EstimatorSpec, data: &crate::Dataset, horizon: usize, seed: u64) -> RepOutcome {
    let est = spec.estimate(data, horizon, Some(seed)).map_err(|e| e.to_string())?;
    if est.len() != horizon + 1 {
        return Err(format!("only {} of {} horizons estimated", est.len(), horizon + 1));
    }
    if est.theta.iter().any(|v| !v.is_finite()) {
        return Err("non-finite estimate".into());
    }
    Ok(est)
}

fn cell_stats(spec: &EstimatorSpec, outcomes: &[RepOutcome], truth: &[f64]) -> Vec<CellStats> {
    let ok: Vec<&IrfResult> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let n = ok.len();
    let method = ok.first().map_or(String::new(), |r| r.method.clone());
    (0..truth.len())
        .map(|h| {
            let nf = n as f64;
            let values: Vec<f64> = ok.iter().map(|r| r.theta[h]).collect();
            let mean = values.iter().sum::<f64>() / nf;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
            let mse = values.iter().map(|v| (v - truth[h]).powi(2)).sum::<f64>() / nf;
            let sd = var.sqrt();
            let with_ci: Vec<&&IrfResult> = ok.iter().filter(|r| r.ci_lo.is_some()).collect();
            let coverage = (!with_ci.is_empty() && with_ci.len() == n).then(|| {
                with_ci.iter().filter(|r| r.covers(h, truth[h]) == Some(true)).count() as f64 / nf
            });
            CellStats {
                estimator: spec.name.clone(),
                method: method.clone(),
                horizon: h,
                truth: truth[h],
                n,
                mean,
                bias: mean - truth[h],
                sd,
                mse,
                mc_se_bias: sd / nf.sqrt(),
                coverage,
                mc_se_coverage: coverage.map(|c| (c * (1.0 - c) / nf).sqrt()),
                median_ci_width: median(ok.iter().filter_map(|r| r.ci_width().map(|w| w[h])).collect()),
                median_se: median(ok.iter().filter_map(|r| r.se.as_ref().map(|s| s[h])).collect()),
            }
        })
        .collect()
}

fn comparison_stats(c: &Comparison, lp: &[RepOutcome], var: &[RepOutcome], horizons: usize) -> Vec<ComparisonStats> {
    let pairs: Vec<(&IrfResult, &IrfResult)> = lp
        .iter()
        .zip(var)
        .filter_map(|(l, v)| Some((l.as_ref().ok()?, v.as_ref().ok()?)))
        .collect();
    let n = pairs.len();
    let ratios: Vec<Vec<f64>> = pairs.iter().filter_map(|(l, v)| se_ratio(l, v).ok()).collect();
    let diffs: Vec<Vec<f64>> = pairs.iter().filter_map(|(l, v)| scaled_difference(l, v).ok()).collect();
    let has_ci = n > 0 && pairs.iter().all(|(l, _)| l.ci_lo.is_some());
    (0..horizons)
        .map(|h| {
            let inside = has_ci.then(|| {
                pairs.iter().filter(|(l, v)| l.covers(h, v.theta[h]) == Some(true)).count() as f64 / n as f64
            });
            ComparisonStats {
                lp: c.lp.clone(),
                var: c.var.clone(),
                horizon: h,
                n,
                median_se_ratio: median(ratios.iter().map(|r| r[h]).collect()),
                median_scaled_diff: median(diffs.iter().map(|d| d[h]).collect()),
                var_in_lp_share: inside,
                var_outside_lp_share: inside.map(|s| 1.0 - s),
            }
        })
        .collect()
}

/// Runs every estimator on `reps` simulated datasets and aggregates.
///
/// Fails with [`Error::Experiment`] when any estimator fails on more than 1%
/// of replications; the message lists every estimator's failure count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<McReport> {
    config.validate()?;
    let truth = config.true_irf()?;
    let estimators = config.resolved_estimators()?;
    let work = || -> Result<Vec<Vec<RepOutcome>>> {
        (0..config.reps)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(config.base_seed, r as u64);
                let data = simulate(&config.dgp, config.t, seed)?;
                Ok(estimators
                    .iter()
                    .enumerate()
                    .map(|(i, e)| run_one(e, &data, config.horizon, derive_seed(seed, 1 + i as u64)))
                    .collect())
            })
            .collect()
    };
    let by_rep = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Input(format!("cannot start {w} workers: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let by_estimator: Vec<Vec<RepOutcome>> = (0..estimators.len())
        .map(|i| by_rep.iter().map(|rep| rep[i].clone()).collect())
        .collect();

    let failures: Vec<FailureEntry> = estimators
        .iter()
        .zip(&by_estimator)
        .map(|(e, outcomes)| FailureEntry {
            estimator: e.name.clone(),
            failures: outcomes.iter().filter(|o| o.is_err()).count(),
            first_error: outcomes.iter().find_map(|o| o.as_ref().err().cloned()),
        })
        .collect();
    if failures
        .iter()
        .any(|f| f.failures as f64 > MAX_FAILURE_SHARE * config.reps as f64 || f.failures == config.reps)
    {
        let ledger: Vec<String> = failures
            .iter()
            .map(|f| {
                format!(
                    "{}: {}/{} failed{}",
                    f.estimator,
                    f.failures,
                    config.reps,
                    f.first_error.as_ref().map_or(String::new(), |e| format!(" (first: {e})"))
                )
            })
            .collect();
        return Err(Error::Experiment(ledger.join("; ")));
    }

    let cells = estimators
        .iter()
        .zip(&by_estimator)
        .flat_map(|(e, o)| cell_stats(e, o, &truth))
        .collect();
    let index = |name: &str| estimators.iter().position(|e| e.name == name).expect("validated");
    let comparisons = config
        .comparisons
        .iter()
        .flat_map(|c| comparison_stats(c, &by_estimator[index(&c.lp)], &by_estimator[index(&c.var)], truth.len()))
        .collect();
    let estimates = estimators
        .iter()
        .zip(&by_estimator)
        .map(|(e, o)| (e.name.clone(), o.iter().map(|r| r.as_ref().ok().map(|x| x.theta.clone())).collect()))
        .collect();
    Ok(McReport {
        version: VERSION.to_string(),
        config_hash: config.hash(),
        config: config.clone(),
        truth,
        cells,
        comparisons,
        failures,
        estimates,
    })
}

/// Median across groups of one estimator's statistics at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianRow {
    pub estimator: String,
    pub horizon: usize,
    pub median_abs_bias: f64,
    pub median_sd: f64,
    pub median_coverage: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub groups: Vec<(String, McReport)>,
    pub medians: Vec<MedianRow>,
}

impl SweepReport {
    pub fn group(&self, label: &str) -> Option<&McReport> {
        self.groups.iter().find(|(l, _)| l == label).map(|(_, r)| r)
    }

    pub fn write_tidy_csv<W: Write>(&self, writer: W) -> Result<()> {
        let reports: Vec<(Option<&str>, &McReport)> = self.groups.iter().map(|(l, r)| (Some(l.as_str()), r)).collect();
        let joined: String = self.groups.iter().map(|(_, r)| r.config_hash.as_str()).collect();
        write_tidy(writer, &config_hash(joined.as_bytes()), &reports)
    }
}

/// Runs labelled experiments that share a horizon grid and reports, for
/// every estimator name present in all of them, medians across groups.
pub fn sweep(configs: &[(String, ExperimentConfig)]) -> Result<SweepReport> {
    let Some((_, first)) = configs.first() else {
        return Err(Error::Input("sweep needs at least one experiment".into()));
    };
    if let Some((label, _)) = configs.iter().find(|(_, c)| c.horizon != first.horizon) {
        return Err(Error::Input(format!(
            "group '{label}' has a different horizon grid than the first group"
        )));
    }
    let groups = configs
        .iter()
        .map(|(label, c)| Ok((label.clone(), run_experiment(c)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut medians = Vec::new();
    for e in &first.estimators {
        if !configs.iter().all(|(_, c)| c.estimators.iter().any(|x| x.name == e.name)) {
            continue;
        }
        for h in 0..=first.horizon {
            let cells: Vec<&CellStats> = groups.iter().filter_map(|(_, r)| r.cell(&e.name, h)).collect();
            let coverage: Vec<f64> = cells.iter().filter_map(|c| c.coverage).collect();
            medians.push(MedianRow {
                estimator: e.name.clone(),
                horizon: h,
                median_abs_bias: median(cells.iter().map(|c| c.bias.abs()).collect()).unwrap_or(f64::NAN),
                median_sd: median(cells.iter().map(|c| c.sd).collect()).unwrap_or(f64::NAN),
                median_coverage: (coverage.len() == cells.len()).then(|| median(coverage)).flatten(),
            });
        }
    }
    Ok(SweepReport { groups, medians })
}
