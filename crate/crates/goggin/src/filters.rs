//! Filter bank: Kalman filter, Goggin filter (plain and centered), trivial
//! mean/observation filters, and the naive batch-averaging filter.
//!
//! All recursive filters share one Riccati machinery. With `Q = 1/N`,
//! `iota = I(v)` (or 1 for the Kalman baseline), `R = s^2 iota`, and
//! `M_t = gamma^2 P_{t-1} + Q`:
//!
//! ```text
//! P_t = R M_t / (iota^2 M_t + R),    K_t = P_t iota / R = P_t / s^2,
//! ```
//!
//! whose stationary point in information form `J = 1/P` solves
//! `J = iota/s^2 + J N/(J + gamma^2 N)` with positive root
//! `J_inf = [a + sqrt(a^2 + 4 gamma^2 N iota/s^2)]/2`,
//! `a = (2 - 1/N) + iota/s^2`. The Kalman filter uses the observation `y`
//! directly; the Goggin variants pass it through the observation score first.

use crate::error::{Error, Result};
use crate::state_space::{Model, Trajectory};
use std::fmt;

/// Which estimator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// Kalman filter with the true observation variance `R = s^2` (BLUE
    /// baseline).
    Kf,
    /// Goggin filter: `x' = gamma x + K(s phi(y/s) - I(v) gamma x)`.
    Gf,
    /// Centered Goggin filter: `x' = gamma x + K s phi((y - gamma x)/s)`.
    Cgf,
    /// Constant stationary mean, `x' = 0`.
    TrivialMean,
    /// Raw observation, `x' = y`.
    TrivialObs,
    /// Per-batch mean of `y` (within-batch future observations allowed).
    NaiveBatch { tau: usize },
}

impl FilterMode {
    /// Parse a config-file mode name; `naive_tau` supplies the batch size
    /// when the name is `naive_batch`.
    pub fn parse(name: &str, naive_tau: usize) -> Result<Self> {
        match name {
            "kf" => Ok(FilterMode::Kf),
            "gf" => Ok(FilterMode::Gf),
            "cgf" => Ok(FilterMode::Cgf),
            "trivial_mean" => Ok(FilterMode::TrivialMean),
            "trivial_obs" => Ok(FilterMode::TrivialObs),
            "naive_batch" => Ok(FilterMode::NaiveBatch { tau: naive_tau }),
            _ => Err(Error::config(format!("unknown filter mode `{name}`"))),
        }
    }

    /// Whether the mode carries a gain schedule.
    pub fn uses_gains(&self) -> bool {
        matches!(self, FilterMode::Kf | FilterMode::Gf | FilterMode::Cgf)
    }
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FilterMode::Kf => "kf",
            FilterMode::Gf => "gf",
            FilterMode::Cgf => "cgf",
            FilterMode::TrivialMean => "trivial_mean",
            FilterMode::TrivialObs => "trivial_obs",
            FilterMode::NaiveBatch { .. } => "naive_batch",
        };
        f.write_str(name)
    }
}

/// Whether runners follow the finite-time gain sequence or pin the
/// stationary gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    Recursive,
    Stationary,
}

impl GainMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "recursive" => Ok(GainMode::Recursive),
            "stationary" => Ok(GainMode::Stationary),
            _ => Err(Error::config(format!("unknown gain mode `{name}`"))),
        }
    }
}

impl fmt::Display for GainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GainMode::Recursive => "recursive",
            GainMode::Stationary => "stationary",
        })
    }
}

/// Riccati schedule for one filter: per-step `(P_t, K_t)` plus the
/// closed-form stationary pair.
#[derive(Debug, Clone)]
pub struct GainSchedule {
    /// Process noise variance `Q = 1/N`.
    pub q: f64,
    /// Effective observation variance `R = s^2 iota`.
    pub r: f64,
    /// Observation information multiplier: `I(v)` for GF/CGF, 1 for KF.
    pub iota: f64,
    /// `P_t` for `t = 1..=horizon`.
    pub p: Vec<f64>,
    /// `K_t = P_t iota / R`.
    pub k: Vec<f64>,
    pub p_inf: f64,
    pub k_inf: f64,
}

impl GainSchedule {
    /// One Riccati update from the previous posterior variance.
    pub fn advance(&self, model: &Model, p_prev: f64) -> f64 {
        let m = model.gamma() * model.gamma() * p_prev + self.q;
        self.r * m / (self.iota * self.iota * m + self.r)
    }
}

fn schedule_with_iota(model: &Model, iota: f64, horizon: usize, p0: f64) -> Result<GainSchedule> {
    if !(p0.is_finite() && p0 >= 0.0) {
        return Err(Error::validation(format!("P0 must be finite and >= 0, got {p0}")));
    }
    let n = model.n();
    let s2 = model.s() * model.s();
    let gamma = model.gamma();
    let a = (2.0 - 1.0 / n) + iota / s2;
    let j_inf = 0.5 * (a + (a * a + 4.0 * gamma * gamma * n * iota / s2).sqrt());
    let p_inf = 1.0 / j_inf;
    let mut sched = GainSchedule {
        q: 1.0 / n,
        r: s2 * iota,
        iota,
        p: Vec::with_capacity(horizon),
        k: Vec::with_capacity(horizon),
        p_inf,
        k_inf: p_inf / s2,
    };
    let mut p = p0;
    for _ in 0..horizon {
        p = sched.advance(model, p);
        sched.p.push(p);
        sched.k.push(p / s2);
    }
    Ok(sched)
}

/// Gain schedule for the Goggin filters (`iota = I(v)`).
pub fn gain_schedule(model: &Model, horizon: usize, p0: f64) -> Result<GainSchedule> {
    schedule_with_iota(model, model.obs_noise().fisher_information(), horizon, p0)
}

/// Gain schedule for the Kalman baseline (`iota = 1`, `R = s^2`).
pub fn kf_gain_schedule(model: &Model, horizon: usize, p0: f64) -> Result<GainSchedule> {
    schedule_with_iota(model, 1.0, horizon, p0)
}

/// `x' = gamma x + K (y - gamma x)`.
pub fn kf_step(estimate: f64, y: f64, gamma: f64, k: f64) -> f64 {
    let pred = gamma * estimate;
    pred + k * (y - pred)
}

/// `x' = gamma x + K (s phi(y/s) - I(v) gamma x)`.
pub fn gf_step(estimate: f64, y: f64, model: &Model, k: f64) -> f64 {
    let s = model.s();
    let pred = model.gamma() * estimate;
    let z = s * model.obs_noise().score(y / s);
    pred + k * (z - model.obs_noise().fisher_information() * pred)
}

/// `x' = gamma x + K s phi((y - gamma x)/s)`.
pub fn centered_gf_step(estimate: f64, y: f64, model: &Model, k: f64) -> f64 {
    let s = model.s();
    let pred = model.gamma() * estimate;
    pred + k * s * model.obs_noise().score((y - pred) / s)
}

/// Batch-averaging estimates: every `t` in batch `k` gets the mean of `y`
/// over batch `k`; a trailing partial batch uses its own mean.
pub fn naive_batch_filter(y: &[f64], tau: usize) -> Result<Vec<f64>> {
    if tau == 0 {
        return Err(Error::validation("batch size must be >= 1"));
    }
    if tau > y.len() {
        return Err(Error::validation(format!(
            "batch size {tau} exceeds trajectory length {}",
            y.len()
        )));
    }
    let mut out = Vec::with_capacity(y.len());
    for chunk in y.chunks(tau) {
        let mean = chunk.iter().sum::<f64>() / chunk.len() as f64;
        out.extend(std::iter::repeat(mean).take(chunk.len()));
    }
    Ok(out)
}

/// `(zeros, y)`: the stationary-mean filter and the raw-observation filter.
pub fn trivial_filters(y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (vec![0.0; y.len()], y.to_vec())
}

/// Run one filter along a trajectory from `x_hat_0 = 0`; Recursive mode uses
/// the `P_t` schedule started at the stationary signal variance, Stationary
/// mode pins `K_inf`.
pub fn run_filter(
    model: &Model,
    traj: &Trajectory,
    mode: FilterMode,
    gain_mode: GainMode,
) -> Result<Vec<f64>> {
    let y = &traj.y;
    if y.is_empty() {
        return Ok(Vec::new());
    }
    match mode {
        FilterMode::TrivialMean => Ok(vec![0.0; y.len()]),
        FilterMode::TrivialObs => Ok(y.clone()),
        FilterMode::NaiveBatch { tau } => naive_batch_filter(y, tau),
        FilterMode::Kf | FilterMode::Gf | FilterMode::Cgf => {
            let p0 = model.stationary_var();
            let sched = match (mode, gain_mode) {
                (FilterMode::Kf, GainMode::Recursive) => kf_gain_schedule(model, y.len(), p0)?,
                (FilterMode::Kf, GainMode::Stationary) => kf_gain_schedule(model, 0, p0)?,
                (_, GainMode::Recursive) => gain_schedule(model, y.len(), p0)?,
                (_, GainMode::Stationary) => gain_schedule(model, 0, p0)?,
            };
            let gamma = model.gamma();
            let mut estimate = 0.0;
            let mut out = Vec::with_capacity(y.len());
            for (t, &obs) in y.iter().enumerate() {
                let k = match gain_mode {
                    GainMode::Recursive => sched.k[t],
                    GainMode::Stationary => sched.k_inf,
                };
                estimate = match mode {
                    FilterMode::Kf => kf_step(estimate, obs, gamma, k),
                    FilterMode::Gf => gf_step(estimate, obs, model, k),
                    FilterMode::Cgf => centered_gf_step(estimate, obs, model, k),
                    _ => unreachable!(),
                };
                out.push(estimate);
            }
            Ok(out)
        }
    }
}
