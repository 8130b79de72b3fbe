//! Residual block bootstrap from a bias-corrected VAR: percentile-t intervals
//! for local projections and Efron percentile intervals for VAR responses.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::irf::{IrfResult, METHOD_LP_BOOT_T, METHOD_VAR_EFRON};
use crate::linalg::{derive_seed, substream, SimRng};
use crate::lp::{lp_estimate, LpSpec};
use crate::var::{fit_var, pope_correct, structural_irf, Identification, Normalization, VarFit};

pub const MIN_REPLICATIONS: usize = 100;

/// Failed draws are redrawn until this many attempts per replication are used up.
pub const REDRAW_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

/// Block length: a fixed integer or `"auto"` for [`block_length_rule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockLength {
    Fixed(usize),
    Rule(AutoKeyword),
}

impl Default for BlockLength {
    fn default() -> Self {
        BlockLength::Rule(AutoKeyword::Auto)
    }
}

fn default_level() -> f64 {
    0.90
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootConfig {
    #[serde(rename = "B")]
    pub replications: usize,
    #[serde(default)]
    pub block_len: BlockLength,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
}

impl BootConfig {
    pub fn new(replications: usize, level: f64, seed: u64) -> Self {
        Self {
            replications,
            block_len: BlockLength::default(),
            level,
            seed,
        }
    }

    pub fn with_block_len(mut self, block_len: usize) -> Self {
        self.block_len = BlockLength::Fixed(block_len);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::Input(format!(
                "bootstrap needs B >= {MIN_REPLICATIONS}, got {}",
                self.replications
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Input(format!("level must lie in (0,1), got {}", self.level)));
        }
        if self.block_len == BlockLength::Fixed(0) {
            return Err(Error::Input("block_len must be at least 1".into()));
        }
        Ok(())
    }

    /// Concrete block length for `rows` residuals.
    pub fn resolve_block_len(&self, rows: usize) -> Result<usize> {
        let len = match self.block_len {
            BlockLength::Fixed(l) => l,
            BlockLength::Rule(_) => block_length_rule(rows),
        };
        if len == 0 || len > rows {
            return Err(Error::Input(format!(
                "block_len {len} must lie in 1..={rows} (the effective sample)"
            )));
        }
        Ok(len)
    }
}

/// `ceil(5.03·T^{1/4})`, capped at `floor(T/2)`.
pub fn block_length_rule(t: usize) -> usize {
    let rule = (5.03 * (t as f64).powf(0.25)).ceil() as usize;
    rule.min(t / 2).max(1)
}

/// Type-7 empirical quantile of sorted data (linear interpolation between
/// order statistics at `(n-1)q`).
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Moving-block resample of the rows of `residuals` with position-wise centering.
///
/// Blocks of `block_len` consecutive rows start uniformly in `0..=T-ℓ` and are
/// concatenated up to `T` rows. Row `s` of every block is then reduced by the
/// average of `û_{s+r}` over all admissible starts `r`, so each position has
/// bootstrap mean exactly zero.
///
/// # Panics
/// If `block_len` is zero or exceeds the number of rows.
pub fn resample_residuals<R: Rng + ?Sized>(residuals: &DMatrix<f64>, block_len: usize, rng: &mut R) -> DMatrix<f64> {
    let (t, n) = residuals.shape();
    assert!(block_len >= 1 && block_len <= t, "block_len must lie in 1..=rows");
    let starts = t - block_len + 1;
    let mut center = DMatrix::zeros(block_len, n);
    for s in 0..block_len {
        for r in 0..starts {
            for j in 0..n {
                center[(s, j)] += residuals[(s + r, j)];
            }
        }
    }
    center /= starts as f64;

    let mut out = DMatrix::zeros(t, n);
    let mut row = 0;
    while row < t {
        let start = rng.random_range(0..starts);
        for s in 0..block_len.min(t - row) {
            for j in 0..n {
                out[(row, j)] = residuals[(start + s, j)] - center[(s, j)];
            }
            row += 1;
        }
    }
    out
}

/// Bias-corrected VAR used to regenerate bootstrap samples.
#[derive(Debug, Clone)]
pub struct BootstrapWorld {
    fit: VarFit,
    observed: Vec<DVector<f64>>,
    block_len: usize,
}

impl BootstrapWorld {
    /// Fits a VAR(p) with intercept on `columns` and applies the Pope correction.
    pub fn new(data: &Dataset, columns: &[String], p: usize, config: &BootConfig) -> Result<Self> {
        let fit = pope_correct(&fit_var(data, columns, p, true)?);
        let block_len = config.resolve_block_len(fit.effective_t())?;
        let cols = columns.iter().map(|c| data.column(c)).collect::<Result<Vec<_>>>()?;
        let observed = (0..data.len())
            .map(|t| DVector::from_fn(columns.len(), |i, _| cols[i][t]))
            .collect();
        Ok(Self {
            fit,
            observed,
            block_len,
        })
    }

    pub fn fit(&self) -> &VarFit {
        &self.fit
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// One bootstrap sample: `p` consecutive observed rows at a uniform start,
    /// then the corrected VAR driven by block-resampled residuals.
    pub fn generate(&self, rng: &mut SimRng) -> Result<Dataset> {
        let p = self.fit.p();
        let t = self.observed.len();
        let start = rng.random_range(0..=t - p);
        let shocks = resample_residuals(&self.fit.residuals, self.block_len, rng);
        let mut path: Vec<DVector<f64>> = self.observed[start..start + p].to_vec();
        for s in p..t {
            let mut v = self.fit.intercept.clone();
            for (l, a) in self.fit.lags.iter().enumerate() {
                v += a * &path[s - 1 - l];
            }
            v += shocks.row(s - p).transpose();
            path.push(v);
        }
        Dataset::new(
            self.fit
                .names
                .iter()
                .enumerate()
                .map(|(i, name)| (name.clone(), path.iter().map(|v| v[i]).collect()))
                .collect(),
        )
    }
}

/// Variables and recursive identification of the VAR matching an LP spec:
/// contemporaneous controls, then the impulse, then the remaining variables.
pub fn var_system_for_lp(spec: &LpSpec) -> (Vec<String>, Identification) {
    let mut ordering = spec.contemporaneous_controls.clone();
    ordering.push(spec.impulse.clone());
    for c in spec.columns() {
        if !ordering.contains(&c) {
            ordering.push(c);
        }
    }
    let ident = Identification::Recursive {
        impulse: spec.impulse.clone(),
        outcome: spec.outcome.clone(),
        ordering: Some(ordering.clone()),
    };
    (ordering, ident)
}

fn redrawable(e: &Error) -> bool {
    matches!(
        e,
        Error::SingularDesign { .. }
            | Error::DegenerateShock(_)
            | Error::Identification(_)
            | Error::Normalization(_)
            | Error::NonStationary(_)
            | Error::InsufficientSample { .. }
            | Error::Input(_)
    )
}

/// Runs `config.replications` draws in parallel. Draw `i` uses substream
/// `(derive_seed(seed, i), attempt)`, so results do not depend on scheduling.
/// Failed attempts are redrawn; more than `REDRAW_FACTOR·B` attempts in
/// total is an error.
fn run_draws<T, F>(config: &BootConfig, draw: F) -> Result<(Vec<T>, usize)>
where
    T: Send,
    F: Fn(&mut SimRng) -> Result<T> + Sync,
{
    let b = config.replications;
    let budget = REDRAW_FACTOR * b;
    let outcomes: Vec<Result<(T, usize)>> = (0..b)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(config.seed, i as u64);
            let mut last = None;
            for attempt in 0..budget {
                let mut rng = substream(seed, attempt as u64);
                match draw(&mut rng) {
                    Ok(v) => return Ok((v, attempt)),
                    Err(e) if redrawable(&e) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(Error::Bootstrap(format!(
                "draw {i} failed {budget} times; last error: {}",
                last.map_or_else(String::new, |e| e.to_string())
            )))
        })
        .collect();
    let mut values = Vec::with_capacity(b);
    let mut redraws = 0;
    for o in outcomes {
        let (v, extra) = o?;
        redraws += extra;
        values.push(v);
    }
    if b + redraws > budget {
        return Err(Error::Bootstrap(format!(
            "{redraws} redraws exceed the budget of {budget} attempts"
        )));
    }
    Ok((values, redraws))
}

/// Bootstrap t-statistics of the LP, centered at the VAR-implied response.
#[derive(Debug, Clone)]
pub struct LpBootDraws {
    /// Point estimate on the original data.
    pub estimate: IrfResult,
    /// Response implied by the bootstrap VAR (the centering value).
    pub var_irf: Vec<f64>,
    /// `t[b][h] = (θ*_h − θ_VAR,h) / se*_h`
    pub t_stats: Vec<Vec<f64>>,
    pub redraws: usize,
    pub notes: Vec<String>,
}

/// Standard error at rounding level: the estimate is an identity, not a statistic.
fn exact(se: f64, theta: f64) -> bool {
    se <= 1e-10 * theta.abs().max(1.0)
}

fn lp_draw(world: &BootstrapWorld, spec: &LpSpec, var_irf: &[f64], rng: &mut SimRng) -> Result<Vec<f64>> {
    let data = world.generate(rng)?;
    let est = lp_estimate(&data, spec)?;
    if est.len() < var_irf.len() {
        return Err(Error::InsufficientSample {
            needed: var_irf.len(),
            available: est.len(),
        });
    }
    let se = est.se.as_ref().expect("LP reports standard errors");
    (0..var_irf.len())
        .map(|h| {
            if !se[h].is_finite() {
                Err(Error::SingularDesign {
                    columns: vec![spec.impulse.clone()],
                })
            } else if exact(se[h], est.theta[h]) {
                // response fixed by the normalization (own shock on impact)
                Ok(0.0)
            } else {
                Ok((est.theta[h] - var_irf[h]) / se[h])
            }
        })
        .collect()
}

/// Steps 1-5 of the LP percentile-t bootstrap: the LP estimate with EHW
/// errors, a Pope-corrected VAR(`var_p`) world over the LP's variables, and
/// the studentized bootstrap LP draws.
pub fn lp_bootstrap_draws(data: &Dataset, spec: &LpSpec, var_p: usize, config: &BootConfig) -> Result<LpBootDraws> {
    config.validate()?;
    let estimate = lp_estimate(data, spec)?;
    let horizon = estimate.len() - 1;
    let (columns, ident) = var_system_for_lp(spec);
    let world = BootstrapWorld::new(data, &columns, var_p, config)?;
    let var_irf = structural_irf(world.fit(), &ident, horizon, Normalization::UnitImpulse)?.theta;
    let mut trimmed = spec.clone();
    trimmed.horizon = horizon;
    let (t_stats, redraws) = run_draws(config, |rng| lp_draw(&world, &trimmed, &var_irf, rng))?;
    let mut notes = world.fit().warnings.clone();
    if redraws > 0 {
        notes.push(format!("{redraws} bootstrap draws redrawn after estimation failures"));
    }
    Ok(LpBootDraws {
        estimate,
        var_irf,
        t_stats,
        redraws,
        notes,
    })
}

fn percentile_t_interval(draws: &LpBootDraws, level: f64) -> IrfResult {
    let a = 1.0 - level;
    let est = &draws.estimate;
    let se = est.se.as_ref().expect("LP reports standard errors");
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for h in 0..est.len() {
        let t = sorted(draws.t_stats.iter().map(|d| d[h]).collect());
        lo.push(est.theta[h] - se[h] * quantile_type7(&t, 1.0 - a / 2.0));
        hi.push(est.theta[h] - se[h] * quantile_type7(&t, a / 2.0));
    }
    let mut out = est.clone();
    out.ci_lo = Some(lo);
    out.ci_hi = Some(hi);
    out.method = METHOD_LP_BOOT_T.to_string();
    out.notes.extend(draws.notes.iter().cloned());
    out
}

/// LP percentile-t interval `[θ̂ − τ̂ q*_{1−a/2}, θ̂ − τ̂ q*_{a/2}]`.
pub fn lp_percentile_t_ci(data: &Dataset, spec: &LpSpec, var_p: usize, config: &BootConfig) -> Result<IrfResult> {
    let draws = lp_bootstrap_draws(data, spec, var_p, config)?;
    Ok(percentile_t_interval(&draws, config.level))
}

fn var_draw(
    world: &BootstrapWorld,
    ident: &Identification,
    p: usize,
    horizon: usize,
    unit: Normalization,
    rng: &mut SimRng,
) -> Result<Vec<f64>> {
    let data = world.generate(rng)?;
    let fit = pope_correct(&fit_var(&data, &world.fit().names, p, true)?);
    let theta = structural_irf(&fit, ident, horizon, unit)?.theta;
    if theta.iter().all(|v| v.is_finite()) {
        Ok(theta)
    } else {
        Err(Error::NonStationary("bootstrap VAR response is not finite".into()))
    }
}

fn efron_interval(point: IrfResult, draws: &[Vec<f64>], level: f64, redraws: usize) -> IrfResult {
    let a = 1.0 - level;
    let b = draws.len() as f64;
    let mut out = point;
    let (mut lo, mut hi, mut sd) = (Vec::new(), Vec::new(), Vec::new());
    for h in 0..out.len() {
        let v: Vec<f64> = draws.iter().map(|d| d[h]).collect();
        let mean = v.iter().sum::<f64>() / b;
        sd.push((v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0)).sqrt());
        let v = sorted(v);
        lo.push(quantile_type7(&v, a / 2.0));
        hi.push(quantile_type7(&v, 1.0 - a / 2.0));
    }
    let outside: Vec<usize> = (0..out.len())
        .filter(|&h| out.theta[h] < lo[h] || out.theta[h] > hi[h])
        .collect();
    if !outside.is_empty() {
        out.notes
            .push(format!("point estimate lies outside the Efron interval at horizons {outside:?}"));
    }
    if redraws > 0 {
        out.notes
            .push(format!("{redraws} bootstrap draws redrawn after estimation failures"));
    }
    out.se = Some(sd);
    out.ci_lo = Some(lo);
    out.ci_hi = Some(hi);
    out.method = METHOD_VAR_EFRON.to_string();
    out
}

/// Efron percentile interval for a Pope-corrected VAR(`p`) response; `se`
/// holds the bootstrap standard deviation.
pub fn var_efron_ci(
    data: &Dataset,
    columns: &[String],
    ident: &Identification,
    p: usize,
    horizon: usize,
    unit: Normalization,
    config: &BootConfig,
) -> Result<IrfResult> {
    config.validate()?;
    let world = BootstrapWorld::new(data, columns, p, config)?;
    let point = structural_irf(world.fit(), ident, horizon, unit)?;
    let (draws, redraws) = run_draws(config, |rng| var_draw(&world, ident, p, horizon, unit, rng))?;
    Ok(efron_interval(point, &draws, config.level, redraws))
}

/// LP percentile-t and VAR Efron intervals from the same bootstrap samples.
#[derive(Debug, Clone)]
pub struct JointIntervals {
    pub lp: IrfResult,
    pub var: IrfResult,
}

/// Both intervals for the LP spec and a VAR(`var_p`) on the same variables,
/// with unit-impulse normalization, sharing one world and one set of draws.
pub fn lp_var_bootstrap(data: &Dataset, spec: &LpSpec, var_p: usize, config: &BootConfig) -> Result<JointIntervals> {
    config.validate()?;
    let estimate = lp_estimate(data, spec)?;
    let horizon = estimate.len() - 1;
    let (columns, ident) = var_system_for_lp(spec);
    let world = BootstrapWorld::new(data, &columns, var_p, config)?;
    let unit = Normalization::UnitImpulse;
    let var_point = structural_irf(world.fit(), &ident, horizon, unit)?;
    let var_irf = var_point.theta.clone();
    let mut trimmed = spec.clone();
    trimmed.horizon = horizon;
    let (pairs, redraws) = run_draws(config, |rng| {
        let mut lp_rng = rng.clone();
        let t = lp_draw(&world, &trimmed, &var_irf, &mut lp_rng)?;
        let v = var_draw(&world, &ident, var_p, horizon, unit, rng)?;
        Ok((t, v))
    })?;
    let (t_stats, var_draws): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let mut notes = world.fit().warnings.clone();
    if redraws > 0 {
        notes.push(format!("{redraws} bootstrap draws redrawn after estimation failures"));
    }
    let lp_draws = LpBootDraws {
        estimate,
        var_irf,
        t_stats,
        redraws,
        notes,
    };
    Ok(JointIntervals {
        lp: percentile_t_interval(&lp_draws, config.level),
        var: efron_interval(var_point, &var_draws, config.level, redraws),
    })
}

/// Per-horizon fraction of replications whose VAR estimate lies inside the
/// matched LP interval.
pub fn var_in_lp_share(lp: &[IrfResult], var: &[IrfResult]) -> Result<Vec<f64>> {
    if lp.len() != var.len() {
        return Err(Error::Input(format!(
            "{} LP results but {} VAR results",
            lp.len(),
            var.len()
        )));
    }
    if lp.is_empty() {
        return Err(Error::Input("no replications".into()));
    }
    let horizons = lp.iter().chain(var).map(IrfResult::len).min().unwrap_or(0);
    let mut inside = vec![0usize; horizons];
    for (l, v) in lp.iter().zip(var) {
        for (h, count) in inside.iter_mut().enumerate() {
            match l.covers(h, v.theta[h]) {
                Some(true) => *count += 1,
                Some(false) => {}
                None => return Err(Error::Input("LP result carries no interval".into())),
            }
        }
    }
    Ok(inside.iter().map(|c| *c as f64 / lp.len() as f64).collect())
}

/// `1 −` [`var_in_lp_share`].
pub fn var_outside_lp_share(lp: &[IrfResult], var: &[IrfResult]) -> Result<Vec<f64>> {
    Ok(var_in_lp_share(lp, var)?.into_iter().map(|s| 1.0 - s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{simulate, DgpSpec};
    use crate::irf::METHOD_VAR;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn univariate(p: usize, h: usize) -> LpSpec {
        LpSpec::recursive(&s(&["y"]), "y", "y", p, h).unwrap()
    }

    #[test]
    fn block_length_examples() {
        assert_eq!(block_length_rule(240), 20);
        assert_eq!(block_length_rule(100), 16);
        assert_eq!(block_length_rule(16), 8);
    }

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_type7(&v, 0.0), 1.0);
        assert_eq!(quantile_type7(&v, 1.0), 4.0);
        assert!((quantile_type7(&v, 0.25) - 1.75).abs() < 1e-15);
        assert!((quantile_type7(&v, 0.5) - 2.5).abs() < 1e-15);
        assert_eq!(quantile_type7(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn config_json_and_validation() {
        let c: BootConfig = serde_json::from_str(r#"{"B": 200, "block_len": "auto", "level": 0.9, "seed": 3}"#).unwrap();
        assert_eq!(c.block_len, BlockLength::Rule(AutoKeyword::Auto));
        assert_eq!(c.resolve_block_len(240).unwrap(), 20);
        let c: BootConfig = serde_json::from_str(r#"{"B": 200, "block_len": 7}"#).unwrap();
        assert_eq!(c.resolve_block_len(240).unwrap(), 7);
        assert!(c.resolve_block_len(5).is_err());
        assert!(BootConfig::new(99, 0.9, 0).validate().is_err());
        assert!(BootConfig::new(100, 1.0, 0).validate().is_err());
        assert!(BootConfig::new(100, 0.9, 0).with_block_len(0).validate().is_err());
    }

    #[test]
    fn single_block_has_zero_means() {
        // one admissible start: each position is centered by its own value
        let u = DMatrix::from_fn(30, 2, |i, j| ((i * 7 + j * 3) % 11) as f64 + 2.0);
        let out = resample_residuals(&u, 30, &mut substream(1, 0));
        assert!(out.iter().all(|v| *v == 0.0));
        for m in out.row_mean().iter() {
            assert!(m.abs() < 1e-12);
        }
    }

    #[test]
    fn centering_is_exact_over_starts() {
        // averaging the centered block over every start gives zero at every position
        let u = DMatrix::from_fn(25, 2, |i, j| (i as f64).sin() + 3.0 * j as f64 + 1.0);
        let l = 6;
        let starts = 25 - l + 1;
        let mut c = DMatrix::<f64>::zeros(l, 2);
        for s in 0..l {
            for r in 0..starts {
                for j in 0..2 {
                    c[(s, j)] += u[(s + r, j)];
                }
            }
        }
        c /= starts as f64;
        let mut rng = substream(9, 0);
        let draws = 4000;
        let mut acc = DMatrix::<f64>::zeros(25, 2);
        for _ in 0..draws {
            acc += resample_residuals(&u, l, &mut rng);
        }
        acc /= draws as f64;
        for v in acc.iter() {
            assert!(v.abs() < 0.1, "{v}");
        }
    }

    #[test]
    fn iid_resample_has_no_lag_one_correlation() {
        let mut rng = substream(4, 0);
        let t = 100_000;
        let u = DMatrix::from_fn(t, 1, |_, _| rng.random::<f64>() - 0.5);
        let out = resample_residuals(&u, block_length_rule(t), &mut substream(5, 0));
        let x: Vec<f64> = out.column(0).iter().cloned().collect();
        let m = x.iter().sum::<f64>() / t as f64;
        let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
        let c1: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        assert!((c1 / c0).abs() < 0.01);
    }

    #[test]
    fn resample_is_deterministic() {
        let u = DMatrix::from_fn(50, 3, |i, j| (i * j) as f64);
        let a = resample_residuals(&u, 8, &mut substream(2, 1));
        let b = resample_residuals(&u, 8, &mut substream(2, 1));
        assert_eq!(a, b);
    }

    #[test]
    fn world_reproduces_observed_start() {
        let data = simulate(&DgpSpec::arma11(0.5, 0.0, 1.0), 120, 3).unwrap();
        let world = BootstrapWorld::new(&data, &s(&["y"]), 2, &BootConfig::new(100, 0.9, 0)).unwrap();
        let sample = world.generate(&mut substream(1, 0)).unwrap();
        assert_eq!(sample.len(), 120);
        assert_eq!(sample.names(), &s(&["y"])[..]);
        let y = data.column("y").unwrap();
        let b = sample.column("y").unwrap();
        assert!(y.windows(2).any(|w| w[0] == b[0] && w[1] == b[1]));
    }

    #[test]
    fn var_system_orders_contemporaneous_first() {
        let spec = LpSpec::recursive(&s(&["a", "b", "c"]), "b", "c", 2, 4).unwrap();
        let (cols, ident) = var_system_for_lp(&spec);
        assert_eq!(cols, s(&["a", "b", "c"]));
        assert_eq!(ident.impulse(), Some("b"));
    }

    #[test]
    fn percentile_t_is_deterministic_and_monotone_in_level() {
        let data = simulate(&DgpSpec::arma11(0.85, 0.1, 1.0), 240, 11).unwrap();
        let spec = univariate(2, 6);
        let cfg = BootConfig::new(100, 0.90, 5);
        let a = lp_percentile_t_ci(&data, &spec, 2, &cfg).unwrap();
        let b = lp_percentile_t_ci(&data, &spec, 2, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.method, METHOD_LP_BOOT_T);
        let narrow = lp_percentile_t_ci(&data, &spec, 2, &BootConfig { level: 0.68, ..cfg }).unwrap();
        let wide = a.ci_width().unwrap();
        for (n, w) in narrow.ci_width().unwrap().iter().zip(&wide) {
            assert!(n <= w);
        }
    }

    #[test]
    fn t_statistics_center_on_var_response() {
        // unit blocks: the bootstrap world is exactly the fitted VAR with iid shocks
        for (rho, seed) in [(0.7, 21), (0.9, 24)] {
            let data = simulate(&DgpSpec::arma11(rho, 0.0, 1.0), 240, seed).unwrap();
            let cfg = BootConfig::new(2000, 0.9, 8).with_block_len(1);
            let draws = lp_bootstrap_draws(&data, &univariate(1, 8), 1, &cfg).unwrap();
            for h in 0..=8 {
                let mean = draws.t_stats.iter().map(|t| t[h]).sum::<f64>() / 2000.0;
                assert!(mean.abs() < 0.15, "rho={rho} h={h} mean={mean}");
            }
        }
    }

    #[test]
    fn efron_interval_brackets_estimate() {
        let data = simulate(&DgpSpec::arma11(0.6, 0.0, 1.0), 240, 13).unwrap();
        let ident = Identification::Recursive {
            impulse: "y".into(),
            outcome: "y".into(),
            ordering: None,
        };
        let cfg = BootConfig::new(200, 0.90, 1);
        let r = var_efron_ci(&data, &s(&["y"]), &ident, 1, 6, Normalization::UnitImpulse, &cfg).unwrap();
        assert_eq!(r.method, METHOD_VAR_EFRON);
        for h in 1..=6 {
            assert!(r.covers(h, r.theta[h]).unwrap(), "h={h}");
        }
        let again = var_efron_ci(&data, &s(&["y"]), &ident, 1, 6, Normalization::UnitImpulse, &cfg).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn joint_intervals_match_separate_runs() {
        let data = simulate(&DgpSpec::arma11(0.85, 0.1, 1.0), 200, 2).unwrap();
        let spec = univariate(1, 4);
        let cfg = BootConfig::new(100, 0.9, 17);
        let joint = lp_var_bootstrap(&data, &spec, 1, &cfg).unwrap();
        let lp = lp_percentile_t_ci(&data, &spec, 1, &cfg).unwrap();
        assert_eq!(joint.lp, lp);
        let ident = var_system_for_lp(&spec).1;
        let var = var_efron_ci(&data, &s(&["y"]), &ident, 1, 4, Normalization::UnitImpulse, &cfg).unwrap();
        assert_eq!(joint.var.ci_lo, var.ci_lo);
    }

    #[test]
    fn shares() {
        let mut lp = IrfResult::new(vec![1.0, 0.5], METHOD_LP_BOOT_T, 1, vec![10, 9]);
        lp.ci_lo = Some(vec![0.9, 0.4]);
        lp.ci_hi = Some(vec![1.1, 0.6]);
        assert_eq!(var_in_lp_share(&[lp.clone()], &[lp.clone()]).unwrap(), vec![1.0, 1.0]);
        let var = IrfResult::new(vec![1.0, 0.7], METHOD_VAR, 1, vec![10, 10]);
        let inside = var_in_lp_share(&[lp.clone(), lp.clone()], &[var.clone(), lp.clone()]).unwrap();
        assert_eq!(inside, vec![1.0, 0.5]);
        assert_eq!(var_outside_lp_share(std::slice::from_ref(&lp), std::slice::from_ref(&var)).unwrap(), vec![0.0, 1.0]);
        assert!(var_in_lp_share(&[lp], &[]).is_err());
    }
}
