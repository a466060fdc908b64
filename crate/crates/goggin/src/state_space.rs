//! Scaled AR(1) signal with additive observation noise.
//!
//! ```text
//! x_{t+1} = gamma x_t + g w_t,   gamma = 1 - 1/N,  g = 1/sqrt(N)
//! y_t     = x_t + s v_t
//! ```
//!
//! with unit-variance `w`, `v`. The stationary signal variance is
//! `N/(2N - 1)`, so the signal stays order-one while its mixing time grows
//! like `N`; the observation scale `s` sets the noise floor.

use crate::error::{Error, Result};
use crate::noise::{NoiseModel, NoiseSpec};
use rand::Rng;
use std::io::{self, Write};

/// Model parameters plus both noise families.
#[derive(Debug, Clone)]
pub struct Model {
    n: f64,
    s: f64,
    gamma: f64,
    g: f64,
    signal: NoiseModel,
    obs: NoiseModel,
}

/// A simulated path: `x[t-1]` and `y[t-1]` hold the state and observation
/// after `t` transitions from `x0` (time index is 1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Model {
    pub fn new(n: f64, s: f64, signal: NoiseModel, obs: NoiseModel) -> Result<Self> {
        if !n.is_finite() || n <= 1.0 {
            return Err(Error::validation(format!("N must be finite and > 1, got {n}")));
        }
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::validation(format!("s must be finite and > 0, got {s}")));
        }
        Ok(Model {
            n,
            s,
            gamma: 1.0 - 1.0 / n,
            g: 1.0 / n.sqrt(),
            signal,
            obs,
        })
    }

    pub fn from_specs(n: f64, s: f64, signal: &NoiseSpec, obs: &NoiseSpec) -> Result<Self> {
        Model::new(
            n,
            s,
            NoiseModel::from_spec(signal)?,
            NoiseModel::from_spec(obs)?,
        )
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// AR coefficient `gamma = 1 - 1/N`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Signal noise gain `g = 1/sqrt(N)`; `g^2` is the per-step injected
    /// variance.
    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn signal_noise(&self) -> &NoiseModel {
        &self.signal
    }

    pub fn obs_noise(&self) -> &NoiseModel {
        &self.obs
    }

    /// Stationary signal variance `g^2/(1 - gamma^2) = N/(2N - 1)`.
    pub fn stationary_var(&self) -> f64 {
        self.n / (2.0 * self.n - 1.0)
    }

    /// Observation-to-signal scale ratio `s/sqrt(stationary_var)`; the
    /// regimes are organized by `s/sqrt(N)`, which this tracks up to the
    /// factor `sqrt(2 - 1/N)`.
    pub fn snr_ratio(&self) -> f64 {
        self.s / self.stationary_var().sqrt()
    }

    /// `gamma^(2 tau)` evaluated stably for large `N` and `tau`.
    pub fn gamma_pow2(&self, tau: f64) -> f64 {
        (2.0 * tau * (-1.0 / self.n).ln_1p()).exp()
    }

    /// `1 - gamma^(2 tau)` without cancellation.
    pub fn one_minus_gamma_pow2(&self, tau: f64) -> f64 {
        -(2.0 * tau * (-1.0 / self.n).ln_1p()).exp_m1()
    }

    /// Simulate `horizon` transitions from `x0`, drawing fresh noises.
    pub fn simulate<R: Rng + ?Sized>(&self, horizon: usize, x0: f64, rng: &mut R) -> Trajectory {
        let mut x = Vec::with_capacity(horizon);
        let mut y = Vec::with_capacity(horizon);
        let mut state = x0;
        for _ in 0..horizon {
            state = self.gamma * state + self.g * self.signal.sample(rng);
            x.push(state);
            y.push(state + self.s * self.obs.sample(rng));
        }
        Trajectory { x, y }
    }

    /// Deterministic core of [`Self::simulate`]: advance through the given
    /// noise sequences (`w` drives transitions, `v` the observations).
    pub fn simulate_with_noises(&self, x0: f64, w: &[f64], v: &[f64]) -> Result<Trajectory> {
        if w.len() != v.len() {
            return Err(Error::validation(format!(
                "noise sequences must have equal length, got {} and {}",
                w.len(),
                v.len()
            )));
        }
        let mut x = Vec::with_capacity(w.len());
        let mut y = Vec::with_capacity(w.len());
        let mut state = x0;
        for t in 0..w.len() {
            state = self.gamma * state + self.g * w[t];
            x.push(state);
            y.push(state + self.s * v[t]);
        }
        Ok(Trajectory { x, y })
    }
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Write `t,x,y` rows (1-based `t`) with a header.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "t,x,y")?;
        for (t, (x, y)) in self.x.iter().zip(&self.y).enumerate() {
            writeln!(out, "{},{},{}", t + 1, x, y)?;
        }
        Ok(())
    }
}
