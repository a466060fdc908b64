//! Score-corrected scalar filtering for the scaled AR(1) observation model
//!
//! ```text
//! X_{t+1} = (1 - 1/N) X_t + (1/sqrt(N)) w_t,      Y_t = X_t + s_N v_t,
//! ```
//!
//! with unit-variance noises `w`, `v`. The crate provides:
//!
//! - [`noise`]: unit-variance noise families with analytic scores, Fisher
//!   information, sampling, and a dissipativity check;
//! - [`state_space`]: the simulator and exact stationary moments;
//! - [`filters`]: Kalman filter, score-corrected (Goggin) filter, its centered
//!   variant, trivial filters, and the naive batch filter, plus the shared
//!   gain recursion;
//! - [`crlb`]: posterior Cramer-Rao bounds, both unbatched and batched, with
//!   closed-form stationary roots;
//! - [`fisher_grid`]: an FFT density engine measuring how fast weighted noise
//!   sums become Gaussian in Fisher information;
//! - [`particle`]: a bootstrap particle filter used as a numerical MSE oracle;
//! - [`harness`]: seeded Monte Carlo experiments (MSE/bias estimation, regime
//!   classification, rate fits);
//! - [`regimes`]: the closed-form regime map over an (N, s_N) grid;
//! - [`config`]: serde-facing experiment configuration.

pub mod config;
pub mod crlb;
pub mod error;
pub mod filters;
pub mod fisher_grid;
pub mod harness;
pub mod noise;
pub mod particle;
pub mod quad;
pub mod regimes;
pub mod seed;
pub mod state_space;

pub use error::{Error, Result};
