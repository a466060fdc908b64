//! Monte Carlo experiment harness: stationary bias/MSE estimation for the
//! filter bank, regime classification, and rate-fit experiments.
//!
//! Replications are independent work units with deterministically derived
//! seeds, so parallel and serial runs aggregate to bit-identical results and
//! extending a run never reshuffles earlier replications.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filters::{run_filter, FilterMode, GainMode};
use crate::seed::{derive_seed, replication_seed, rng_from, SALT_TRAJECTORY};
use crate::state_space::Model;

/// Numeric proxy for the asymptotic `≫`/`≪` in the regime partition:
/// a ratio beyond this factor counts as "much larger". Boundaries count as
/// the extreme regime.
pub const DEFAULT_REGIME_CUTOFF: f64 = 10.0;

/// One experiment: a system, a time budget, and a set of filters to race.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub model: Model,
    pub horizon: usize,
    pub burn_in: usize,
    pub replications: usize,
    pub filters: Vec<FilterMode>,
    pub seed: u64,
    /// Batch length for the reported CRLB; `None` means `round(s_N)`.
    pub tau_override: Option<usize>,
    pub gain_mode: GainMode,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::validation("horizon must be positive"));
        }
        if self.burn_in >= self.horizon {
            return Err(Error::validation(format!(
                "burn_in {} must be < horizon {}",
                self.burn_in, self.horizon
            )));
        }
        if self.replications < 2 {
            return Err(Error::validation(
                "replications must be >= 2 for a confidence interval",
            ));
        }
        if self.filters.is_empty() {
            return Err(Error::validation("at least one filter is required"));
        }
        Ok(())
    }
}

/// Default burn-in, `20·ceil(s_N·√N)` steps: a generous multiple of the gain
/// recursion's time constant `1/K_∞ = Θ(s_N·√N)`.
pub fn default_burn_in(model: &Model) -> usize {
    20 * (model.s() * model.n().sqrt()).ceil() as usize
}

/// Stationary error moments of one filter, aggregated across replications.
#[derive(Clone, Debug, PartialEq)]
pub struct MseEstimate {
    pub filter_mode: String,
    pub mean_sq_error: f64,
    pub bias: f64,
    /// 95% half-width from replication-level variance.
    pub ci_half_width: f64,
    pub bias_ci_half_width: f64,
    pub replications: usize,
}

/// Paired (common-random-numbers) difference `MSE_a − MSE_b`.
#[derive(Clone, Debug)]
pub struct PairedDiff {
    pub filter_a: String,
    pub filter_b: String,
    pub mean_diff: f64,
    pub ci_half_width: f64,
    pub replications: usize,
}

struct RepStats {
    sq: Vec<f64>,
    err: Vec<f64>,
}

/// Per-replication post-burn-in (squared error, error) time averages; outer
/// index follows `config.filters`, inner index is the replication. One
/// trajectory is shared by all filters of a replication, so cross-filter
/// comparisons on the table are paired by construction.
pub fn replication_table(config: &ExperimentConfig) -> Result<Vec<Vec<(f64, f64)>>> {
    config.validate()?;
    let reps = run_replications(config)?;
    Ok((0..config.filters.len())
        .map(|i| reps.iter().map(|rep| (rep.sq[i], rep.err[i])).collect())
        .collect())
}

/// Aggregate one filter's replication rows into an estimate with 95% CIs.
pub fn summarize(filter_mode: String, rows: &[(f64, f64)]) -> MseEstimate {
    let sq: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (mean_sq_error, ci_half_width) = mean_and_ci(&sq);
    let (bias, bias_ci_half_width) = mean_and_ci(&err);
    MseEstimate {
        filter_mode,
        mean_sq_error,
        bias,
        ci_half_width,
        bias_ci_half_width,
        replications: rows.len(),
    }
}

/// Per-replication: simulate a fresh trajectory, run every filter on it,
/// time-average post-burn-in squared error and error. Aggregates across
/// replications with a 95% CI.
pub fn estimate_mse(config: &ExperimentConfig) -> Result<Vec<MseEstimate>> {
    let table = replication_table(config)?;
    Ok(config
        .filters
        .iter()
        .zip(&table)
        .map(|(mode, rows)| summarize(mode.to_string(), rows))
        .collect())
}

/// Paired comparison of two filters on the shared trajectory set.
pub fn estimate_mse_diff(
    config: &ExperimentConfig,
    a: FilterMode,
    b: FilterMode,
) -> Result<PairedDiff> {
    let mut cfg = config.clone();
    cfg.filters = vec![a, b];
    cfg.validate()?;
    let reps = run_replications(&cfg)?;
    let diffs: Vec<f64> = reps.iter().map(|rep| rep.sq[0] - rep.sq[1]).collect();
    let (mean_diff, ci_half_width) = mean_and_ci(&diffs);
    Ok(PairedDiff {
        filter_a: a.to_string(),
        filter_b: b.to_string(),
        mean_diff,
        ci_half_width,
        replications: cfg.replications,
    })
}

fn run_replications(config: &ExperimentConfig) -> Result<Vec<RepStats>> {
    (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let rep_seed = replication_seed(config.seed, r as u64);
            let mut rng = rng_from(derive_seed(rep_seed, SALT_TRAJECTORY));
            let traj = config.model.simulate(config.horizon, 0.0, &mut rng);
            let mut sq = Vec::with_capacity(config.filters.len());
            let mut err = Vec::with_capacity(config.filters.len());
            for mode in &config.filters {
                let est =
                    run_filter(&config.model, &traj, *mode, config.gain_mode).map_err(|e| {
                        Error::numeric(format!(
                            "filter {mode} failed in replication {r} (seed {rep_seed}): {e}"
                        ))
                    })?;
                let (s2, s1) = tail_moments(&est, &traj.x, config.burn_in);
                sq.push(s2);
                err.push(s1);
            }
            Ok(RepStats { sq, err })
        })
        .collect()
}

pub(crate) fn tail_moments(est: &[f64], x: &[f64], burn_in: usize) -> (f64, f64) {
    let count = (est.len() - burn_in) as f64;
    let mut s2 = 0.0;
    let mut s1 = 0.0;
    for t in burn_in..est.len() {
        let e = est[t] - x[t];
        s2 += e * e;
        s1 += e;
    }
    (s2 / count, s1 / count)
}

/// Sample mean and 95% normal-approximation CI half-width (`1.96·sd/√n`);
/// the half-width is NaN below two values.
pub fn mean_and_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

/// SNR regime of a parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `s_N ≫ √N`: observations carry no usable signal.
    NegligibleSnr,
    /// `s_N ≪ 1/√N`: observations are nearly exact.
    LargeSnr,
    /// `1/√N ≲ s_N ≲ √N` with `s_N > 1`.
    Balanced,
    /// Balanced sub-window `s_N ≤ 1`, where the score-filter guarantees do
    /// not improve on the Kalman baseline.
    LowSnrWindow,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Regime::NegligibleSnr => "negligible_snr",
            Regime::LargeSnr => "large_snr",
            Regime::Balanced => "balanced",
            Regime::LowSnrWindow => "low_snr_window",
        };
        f.write_str(name)
    }
}

/// Regime label with the two ratios that decide it.
#[derive(Clone, Copy, Debug)]
pub struct RegimeLabel {
    pub regime: Regime,
    pub s_over_sqrt_n: f64,
    pub s_times_sqrt_n: f64,
}

/// Deterministic regime classification with `cutoff` as the numeric proxy
/// for `≫`/`≪` (boundaries count as the extreme regime).
pub fn classify_regime(model: &Model, cutoff: f64) -> RegimeLabel {
    let root = model.n().sqrt();
    let s_over_sqrt_n = model.s() / root;
    let s_times_sqrt_n = model.s() * root;
    let regime = if s_over_sqrt_n >= cutoff {
        Regime::NegligibleSnr
    } else if s_times_sqrt_n <= 1.0 / cutoff {
        Regime::LargeSnr
    } else if model.s() <= 1.0 {
        Regime::LowSnrWindow
    } else {
        Regime::Balanced
    };
    RegimeLabel {
        regime,
        s_over_sqrt_n,
        s_times_sqrt_n,
    }
}

/// Rule tying the observation scale to `N` in rate experiments.
#[derive(Clone, Copy, Debug)]
pub enum SRule {
    /// `s_N = √N` (the near-optimality boundary).
    SqrtN,
    /// `s_N = N^{1/4}`.
    NQuarter,
    /// Constant `s_N`.
    Fixed(f64),
}

impl SRule {
    pub fn s_for(&self, n: f64) -> f64 {
        match self {
            SRule::SqrtN => n.sqrt(),
            SRule::NQuarter => n.powf(0.25),
            SRule::Fixed(c) => *c,
        }
    }
}

/// Shared knobs for the rate-fit experiments.
#[derive(Clone, Debug)]
pub struct RateConfig {
    pub signal: crate::noise::NoiseModel,
    pub obs: crate::noise::NoiseModel,
    pub filter: FilterMode,
    pub replications: usize,
    pub horizon: usize,
    /// `None` uses [`default_burn_in`] per point (the horizon must cover it).
    pub burn_in: Option<usize>,
    pub gain_mode: GainMode,
    pub seed: u64,
}

/// One measured point of a rate experiment.
#[derive(Clone, Debug)]
pub struct RatePoint {
    pub n: f64,
    pub s: f64,
    /// |bias| for bias fits; `MSE − 1/bar-J_∞` for gap fits.
    pub value: f64,
    pub ci_half_width: f64,
    /// The batched information bound at `τ = round(s_N)`.
    pub lower_bound: f64,
}

/// Fitted decay: log |value| against log `s_N`.
#[derive(Clone, Debug)]
pub struct RateFit {
    pub slope: f64,
    /// Set when the CI of `value` includes zero at every point, making the
    /// slope meaningless (reported, not an error).
    pub inconclusive: bool,
    pub points: Vec<RatePoint>,
}

fn rate_points<F>(cfg: &RateConfig, n_list: &[f64], s_rule: SRule, measure: F) -> Result<RateFit>
where
    F: Fn(&ExperimentConfig, f64) -> Result<(f64, f64)>,
{
    if n_list.len() < 3 {
        return Err(Error::validation("rate fits need at least 3 points"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("N_list must be strictly increasing"));
    }
    let mut points = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let s = s_rule.s_for(n);
        let model = Model::new(n, s, cfg.signal.clone(), cfg.obs.clone())?;
        let lower_bound = crate::crlb::batched_bound(&model, crate::crlb::default_tau(&model))?
            .lower_bound;
        let burn_in = cfg.burn_in.unwrap_or_else(|| default_burn_in(&model));
        let exp = ExperimentConfig {
            model,
            horizon: cfg.horizon,
            burn_in,
            replications: cfg.replications,
            filters: vec![cfg.filter],
            seed: derive_seed(cfg.seed, i as u64),
            tau_override: None,
            gain_mode: cfg.gain_mode,
        };
        let (value, ci_half_width) = measure(&exp, lower_bound)?;
        points.push(RatePoint {
            n,
            s,
            value,
            ci_half_width,
            lower_bound,
        });
    }
    let inconclusive = points.iter().all(|p| p.value.abs() <= p.ci_half_width);
    let xs: Vec<f64> = points.iter().map(|p| p.s.ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| p.value.abs().max(f64::MIN_POSITIVE).ln())
        .collect();
    let slope = crate::crlb::least_squares_slope(&xs, &ys);
    Ok(RateFit {
        slope,
        inconclusive,
        points,
    })
}

/// Stationary |bias| of the configured filter at each `N`, with `s_N` from
/// the rule; fits the log-log slope of |bias| against `s_N`.
pub fn rate_fit_bias(cfg: &RateConfig, n_list: &[f64], s_rule: SRule) -> Result<RateFit> {
    rate_points(cfg, n_list, s_rule, |exp, _lb| {
        let est = estimate_mse(exp)?;
        Ok((est[0].bias, est[0].bias_ci_half_width))
    })
}

/// Excess of the configured filter's MC MSE over the batched information
/// bound at each `N`; fits the decay of the gap against `s_N`.
pub fn rate_fit_mse_gap(cfg: &RateConfig, n_list: &[f64], s_rule: SRule) -> Result<RateFit> {
    rate_points(cfg, n_list, s_rule, |exp, lb| {
        let est = estimate_mse(exp)?;
        Ok((est[0].mean_sq_error - lb, est[0].ci_half_width))
    })
}
