//! Unit-variance noise families with analytic scores and Fisher information.
//!
//! Every model is symmetric, zero-mean, and scaled to variance 1 by
//! construction. The score is `phi = -h'/h` for the density `h`; the filter
//! bank consumes `phi`, its derivatives, the Fisher information
//! `I(v) = E[phi(v)^2]`, and i.i.d. samples.
//!
//! Supported families: Gaussian, Logistic, Student-t (dof > 4), and a
//! two-component symmetric Gaussian mixture. Laplace is deliberately absent:
//! its score is non-differentiable at 0.

use crate::error::{Error, Result};
use crate::quad;
use crate::seed::rng_from;
use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT as StudentTDist};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;
use std::fmt;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;
const SQRT_2PI: f64 = 2.506_628_274_631_000_2;

/// Absolute tolerance for the adaptive quadrature used on densities.
pub const QUAD_TOL: f64 = 1e-10;
/// Mass allowed outside the quadrature interval `(-L, L)`.
pub const QUAD_TAIL_MASS: f64 = 1e-12;
/// Smallest estimated dissipativity constant the check still accepts.
///
/// On any finite grid the measured ratio `E[phi(v+y)]/y` stays strictly
/// positive for every supported family, so a literal `zeta > 0` test cannot
/// fail; families whose ratio vanishes as the grid widens (bounded,
/// redescending scores such as Student-t) are caught by this floor instead.
pub const DISSIPATIVITY_ZETA_MIN: f64 = 1e-2;

/// Noise family tag as written in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Logistic,
    StudentT,
    GaussianMixture,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Gaussian => "gaussian",
            Family::Logistic => "logistic",
            Family::StudentT => "student_t",
            Family::GaussianMixture => "gaussian_mixture",
        };
        f.write_str(name)
    }
}

/// Per-family parameters after unit-variance normalization.
#[derive(Debug, Clone)]
enum Kind {
    Gaussian,
    /// Logistic with density scale `s = sqrt(3)/pi`, so variance is 1.
    Logistic { s: f64 },
    /// `v = k T` for standard Student-t `T` with `dof` degrees of freedom,
    /// `k = sqrt((dof-2)/dof)`; `ln_c` is the standard-t log normalizer.
    StudentT { dof: f64, k: f64, ln_c: f64 },
    /// `(1/2) N(-mu, sigma^2) + (1/2) N(mu, sigma^2)` with `mu^2 + sigma^2 = 1`.
    Mixture { mu: f64, sigma: f64, scale: f64 },
}

/// A unit-variance noise model: density, score, Fisher information, sampling.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    kind: Kind,
    fisher: f64,
    score_sup_2nd: f64,
    score_sup_2nd_numeric: bool,
    dissipativity_zeta: Option<f64>,
}

/// Result of the Monte Carlo dissipativity check (strong dissipativity plus
/// linear score growth).
#[derive(Debug, Clone, Copy)]
pub struct DissipativityReport {
    /// Largest `zeta` with `E[phi(v+y)]·y >= zeta·y^2` across the grid.
    pub zeta_hat: f64,
    /// Fitted `A` in `|phi(y)| <= A + B|y|`.
    pub growth_a: f64,
    /// Fitted `B` in `|phi(y)| <= A + B|y|`.
    pub growth_b: f64,
    /// `zeta_hat >= DISSIPATIVITY_ZETA_MIN` and the growth fit has
    /// nonnegative residuals on the grid.
    pub pass: bool,
}

impl NoiseModel {
    pub fn gaussian() -> Self {
        NoiseModel {
            kind: Kind::Gaussian,
            fisher: 1.0,
            score_sup_2nd: 0.0,
            score_sup_2nd_numeric: false,
            dissipativity_zeta: None,
        }
    }

    pub fn logistic() -> Self {
        let s = 3.0_f64.sqrt() / PI;
        NoiseModel {
            kind: Kind::Logistic { s },
            // Location-Fisher information of a logistic with scale s is
            // 1/(3 s^2); unit variance forces s^2 = 3/pi^2.
            fisher: PI * PI / 9.0,
            // |phi''| peaks where tanh^2 = 1/3, giving 1/(3 sqrt(3) s^3).
            score_sup_2nd: 1.0 / (3.0 * 3.0_f64.sqrt() * s * s * s),
            score_sup_2nd_numeric: false,
            dissipativity_zeta: None,
        }
    }

    pub fn student_t(dof: f64) -> Result<Self> {
        // Upper cap matches the mixture parameter range guard; far beyond it
        // the gamma-function normalizer loses accuracy while the density is
        // already Gaussian to machine precision.
        if !dof.is_finite() || dof <= 4.0 || dof > 1e6 {
            return Err(Error::validation(format!(
                "student_t requires dof in (4, 1e6], got {dof}"
            )));
        }
        let k = ((dof - 2.0) / dof).sqrt();
        let ln_c = ln_gamma((dof + 1.0) / 2.0) - ln_gamma(dof / 2.0) - 0.5 * (dof * PI).ln();
        let kind = Kind::StudentT { dof, k, ln_c };
        let fisher = (dof / (dof - 2.0)) * (dof + 1.0) / (dof + 3.0);
        let sup2 = numeric_sup_second_deriv(&kind, 30.0 * (dof - 2.0).sqrt());
        Ok(NoiseModel {
            kind,
            fisher,
            score_sup_2nd: sup2,
            score_sup_2nd_numeric: true,
            dissipativity_zeta: None,
        })
    }

    /// Two-component symmetric Gaussian mixture, rescaled to unit variance.
    ///
    /// Expects `weights = (1/2, 1/2)`, mirrored means, and equal sigmas; the
    /// common (mean, sigma) pair is divided by the raw standard deviation.
    pub fn gaussian_mixture(weights: &[f64], means: &[f64], sigmas: &[f64]) -> Result<Self> {
        if weights.len() != 2 || means.len() != 2 || sigmas.len() != 2 {
            return Err(Error::validation(
                "gaussian_mixture requires exactly two components",
            ));
        }
        let finite = weights
            .iter()
            .chain(means)
            .chain(sigmas)
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::validation("gaussian_mixture parameters must be finite"));
        }
        if (weights[0] + weights[1] - 1.0).abs() > 1e-9 || (weights[0] - weights[1]).abs() > 1e-9 {
            return Err(Error::validation(
                "gaussian_mixture weights must be (1/2, 1/2)",
            ));
        }
        let mu_raw = means[0].abs();
        if (means[0] + means[1]).abs() > 1e-9 * mu_raw.max(1.0) {
            return Err(Error::validation("gaussian_mixture means must be mirrored"));
        }
        let sigma_raw = sigmas[0];
        if sigma_raw <= 0.0 || (sigmas[0] - sigmas[1]).abs() > 1e-9 * sigma_raw {
            return Err(Error::validation(
                "gaussian_mixture sigmas must be equal and positive",
            ));
        }
        if mu_raw > 1e6 || sigma_raw > 1e6 {
            return Err(Error::validation("gaussian_mixture parameters out of range"));
        }
        let sd_raw = (mu_raw * mu_raw + sigma_raw * sigma_raw).sqrt();
        let scale = 1.0 / sd_raw;
        let kind = Kind::Mixture {
            mu: mu_raw * scale,
            sigma: sigma_raw * scale,
            scale,
        };
        let fisher = quad_fisher(&kind)?;
        let half = tail_half_width(&kind, QUAD_TAIL_MASS);
        let sup2 = numeric_sup_second_deriv(&kind, half);
        Ok(NoiseModel {
            kind,
            fisher,
            score_sup_2nd: sup2,
            score_sup_2nd_numeric: true,
            dissipativity_zeta: None,
        })
    }

    pub fn from_spec(spec: &NoiseSpec) -> Result<Self> {
        let reject_extras = |allowed_dof: bool, allowed_mix: bool| -> Result<()> {
            if !allowed_dof && spec.dof.is_some() {
                return Err(Error::validation(format!(
                    "field `dof` not valid for family {}",
                    spec.family
                )));
            }
            if !allowed_mix
                && (spec.weights.is_some() || spec.means.is_some() || spec.sigmas.is_some())
            {
                return Err(Error::validation(format!(
                    "fields `weights`/`means`/`sigmas` not valid for family {}",
                    spec.family
                )));
            }
            Ok(())
        };
        match spec.family {
            Family::Gaussian => {
                reject_extras(false, false)?;
                Ok(NoiseModel::gaussian())
            }
            Family::Logistic => {
                reject_extras(false, false)?;
                Ok(NoiseModel::logistic())
            }
            Family::StudentT => {
                reject_extras(true, false)?;
                let dof = spec
                    .dof
                    .ok_or_else(|| Error::validation("student_t requires `dof`"))?;
                NoiseModel::student_t(dof)
            }
            Family::GaussianMixture => {
                reject_extras(false, true)?;
                let w = spec
                    .weights
                    .as_deref()
                    .ok_or_else(|| Error::validation("gaussian_mixture requires `weights`"))?;
                let m = spec
                    .means
                    .as_deref()
                    .ok_or_else(|| Error::validation("gaussian_mixture requires `means`"))?;
                let s = spec
                    .sigmas
                    .as_deref()
                    .ok_or_else(|| Error::validation("gaussian_mixture requires `sigmas`"))?;
                NoiseModel::gaussian_mixture(w, m, s)
            }
        }
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Gaussian => Family::Gaussian,
            Kind::Logistic { .. } => Family::Logistic,
            Kind::StudentT { .. } => Family::StudentT,
            Kind::Mixture { .. } => Family::GaussianMixture,
        }
    }

    /// Internal scale that makes the family unit-variance: the logistic
    /// density scale, the Student-t multiplier `sqrt((dof-2)/dof)`, or the
    /// mixture's normalization factor. 1 for the Gaussian.
    pub fn scale(&self) -> f64 {
        match self.kind {
            Kind::Gaussian => 1.0,
            Kind::Logistic { s } => s,
            Kind::StudentT { k, .. } => k,
            Kind::Mixture { scale, .. } => scale,
        }
    }

    /// Cached Fisher information `I(v) = E[phi(v)^2] >= 1`, equality iff
    /// Gaussian. Closed forms for Gaussian/Logistic/Student-t, adaptive
    /// quadrature for the mixture.
    pub fn fisher_information(&self) -> f64 {
        self.fisher
    }

    /// Cached `sup |phi''|`.
    pub fn score_sup_norm_2nd(&self) -> f64 {
        self.score_sup_2nd
    }

    /// Whether [`Self::score_sup_norm_2nd`] is a numeric grid supremum rather
    /// than an analytic bound.
    pub fn score_sup_norm_2nd_is_numeric(&self) -> bool {
        self.score_sup_2nd_numeric
    }

    /// Dissipativity constant cached by [`Self::check_dissipativity`].
    pub fn dissipativity_zeta(&self) -> Option<f64> {
        self.dissipativity_zeta
    }

    /// Whether the family satisfies a Poincare inequality (static table,
    /// never computed): true for log-concave/compact-overlap families, false
    /// for polynomial tails.
    pub fn poincare_finite(&self) -> bool {
        !matches!(self.kind, Kind::StudentT { .. })
    }

    /// Known Poincare constant where one is classical: 1/2 for the Gaussian.
    pub fn poincare_constant(&self) -> Option<f64> {
        match self.kind {
            Kind::Gaussian => Some(0.5),
            _ => None,
        }
    }

    /// Score `phi(x) = -h'(x)/h(x)`.
    pub fn score(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Gaussian => x,
            Kind::Logistic { s } => (x / (2.0 * s)).tanh() / s,
            Kind::StudentT { dof, .. } => {
                let c = dof - 2.0;
                (dof + 1.0) * x / (c + x * x)
            }
            Kind::Mixture { mu, sigma, .. } => mixture_moments(x, mu, sigma).0,
        }
    }

    /// First or second derivative of the score.
    pub fn score_deriv(&self, x: f64, order: u8) -> Result<f64> {
        match order {
            1 => Ok(self.score_d1(x)),
            2 => Ok(self.score_d2(x)),
            _ => Err(Error::validation(format!(
                "score_deriv order must be 1 or 2, got {order}"
            ))),
        }
    }

    fn score_d1(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Gaussian => 1.0,
            Kind::Logistic { s } => {
                let t = (x / (2.0 * s)).tanh();
                (1.0 - t * t) / (2.0 * s * s)
            }
            Kind::StudentT { dof, .. } => {
                let c = dof - 2.0;
                let d = c + x * x;
                (dof + 1.0) * (c - x * x) / (d * d)
            }
            Kind::Mixture { mu, sigma, .. } => {
                let (a1, a2, _) = mixture_moments(x, mu, sigma);
                1.0 / (sigma * sigma) - a2 + a1 * a1
            }
        }
    }

    fn score_d2(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Gaussian => 0.0,
            Kind::Logistic { s } => {
                let t = (x / (2.0 * s)).tanh();
                -t * (1.0 - t * t) / (2.0 * s * s * s)
            }
            Kind::StudentT { dof, .. } => {
                let c = dof - 2.0;
                let d = c + x * x;
                -2.0 * (dof + 1.0) * x * (3.0 * c - x * x) / (d * d * d)
            }
            Kind::Mixture { mu, sigma, .. } => {
                let (a1, a2, a3) = mixture_moments(x, mu, sigma);
                a3 - 3.0 * a1 * a2 + 2.0 * a1 * a1 * a1
            }
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Gaussian => -0.5 * x * x - LN_SQRT_2PI,
            Kind::Logistic { s } => {
                let a = x.abs() / s;
                -a - s.ln() - 2.0 * (-a).exp().ln_1p()
            }
            Kind::StudentT { dof, k, ln_c } => {
                let u = x / k;
                ln_c - 0.5 * (dof + 1.0) * (u * u / dof).ln_1p() - k.ln()
            }
            Kind::Mixture { mu, sigma, .. } => {
                let l0 = -0.5 * ((x + mu) / sigma).powi(2);
                let l1 = -0.5 * ((x - mu) / sigma).powi(2);
                let m = l0.max(l1);
                m + (0.5 * ((l0 - m).exp() + (l1 - m).exp())).ln() - sigma.ln() - LN_SQRT_2PI
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// One i.i.d. draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            Kind::Gaussian => rng.sample(StandardNormal),
            Kind::Logistic { s } => {
                let u: f64 = rng.sample(Open01);
                s * (u / (1.0 - u)).ln()
            }
            Kind::StudentT { dof, k, .. } => {
                let t: f64 = StudentTDist::new(dof).expect("dof validated").sample(rng);
                k * t
            }
            Kind::Mixture { mu, sigma, .. } => {
                let center = if rng.random::<bool>() { mu } else { -mu };
                let z: f64 = rng.sample(StandardNormal);
                center + sigma * z
            }
        }
    }

    /// `count` i.i.d. draws; `count = 0` gives an empty vector.
    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        match self.kind {
            Kind::StudentT { dof, k, .. } => {
                let dist = StudentTDist::new(dof).expect("dof validated");
                (0..count).map(|_| k * dist.sample(rng)).collect()
            }
            _ => (0..count).map(|_| self.sample(rng)).collect(),
        }
    }

    /// Monte Carlo check of strong dissipativity and linear score growth.
    ///
    /// Estimates `h_hat(y) = E[phi(v+y)]` on a symmetric grid with common
    /// random numbers, reports the largest `zeta` with
    /// `h_hat(y)·y >= zeta·y^2` on the grid, and fits `(A, B)` with
    /// `|phi(y)| <= A + B|y|`. The estimated `zeta_hat` is cached on the
    /// model.
    pub fn check_dissipativity(
        &mut self,
        grid_half_width: f64,
        grid_points: usize,
        mc_samples: usize,
        rng_seed: u64,
    ) -> Result<DissipativityReport> {
        if !(grid_half_width.is_finite() && grid_half_width > 0.0) {
            return Err(Error::validation("grid_half_width must be positive"));
        }
        if grid_points < 3 {
            return Err(Error::validation("grid_points must be at least 3"));
        }
        if mc_samples < 100 {
            return Err(Error::validation("mc_samples must be at least 100"));
        }
        let mut rng = rng_from(rng_seed);
        let draws = self.sample_n(&mut rng, mc_samples);
        let mut zeta_hat = f64::INFINITY;
        let growth_a = self.score(0.0).abs();
        let mut growth_b = 0.0_f64;
        for i in 0..grid_points {
            let y = -grid_half_width
                + 2.0 * grid_half_width * (i as f64) / ((grid_points - 1) as f64);
            if y.abs() < 1e-12 {
                continue;
            }
            let mut acc = 0.0;
            for &v in &draws {
                acc += self.score(v + y);
            }
            let h_hat = acc / mc_samples as f64;
            zeta_hat = zeta_hat.min(h_hat / y);
            growth_b = growth_b.max((self.score(y).abs() - growth_a) / y.abs());
        }
        let mut residuals_ok = true;
        for i in 0..grid_points {
            let y = -grid_half_width
                + 2.0 * grid_half_width * (i as f64) / ((grid_points - 1) as f64);
            if growth_a + growth_b * y.abs() - self.score(y).abs() < -1e-12 {
                residuals_ok = false;
            }
        }
        let report = DissipativityReport {
            zeta_hat,
            growth_a,
            growth_b,
            pass: zeta_hat >= DISSIPATIVITY_ZETA_MIN && residuals_ok,
        };
        self.dissipativity_zeta = Some(zeta_hat);
        Ok(report)
    }

    /// Half-width `L` with total mass outside `(-L, L)` below `tail_mass`.
    #[cfg(test)]
    pub(crate) fn tail_half_width(&self, tail_mass: f64) -> f64 {
        tail_half_width(&self.kind, tail_mass)
    }

    /// Conservative bound on the mass outside `(-x, x)`.
    pub(crate) fn tail_mass_outside(&self, x: f64) -> f64 {
        2.0 * survival_upper_bound(&self.kind, x)
    }

    /// Smallest `x` (up to bisection resolution) with `h(t) <= threshold`
    /// for all `t >= x`.
    pub(crate) fn tail_point_below_density(&self, threshold: f64) -> f64 {
        let start = match self.kind {
            Kind::Mixture { mu, sigma, .. } => mu + sigma,
            _ => 1.0,
        };
        let mut hi = start.max(1.0);
        let mut iter = 0;
        while self.density(hi) > threshold {
            hi *= 2.0;
            iter += 1;
            if iter > 2000 {
                return hi;
            }
        }
        let mut lo = hi / 2.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.density(mid) > threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Responsibility-weighted moments `(A1, A2, A3)` of `r_i = (x - mu_i)/sigma^2`
/// for the two mixture components; `A1` is the score.
fn mixture_moments(x: f64, mu: f64, sigma: f64) -> (f64, f64, f64) {
    let s2 = sigma * sigma;
    let r0 = (x + mu) / s2;
    let r1 = (x - mu) / s2;
    let l0 = -0.5 * ((x + mu) / sigma).powi(2);
    let l1 = -0.5 * ((x - mu) / sigma).powi(2);
    let m = l0.max(l1);
    let q0 = (l0 - m).exp();
    let q1 = (l1 - m).exp();
    let z = q0 + q1;
    let a1 = (q0 * r0 + q1 * r1) / z;
    let a2 = (q0 * r0 * r0 + q1 * r1 * r1) / z;
    let a3 = (q0 * r0 * r0 * r0 + q1 * r1 * r1 * r1) / z;
    (a1, a2, a3)
}

/// Fisher information by adaptive quadrature of `phi^2 h` on a tail-safe
/// interval.
fn quad_fisher(kind: &Kind) -> Result<f64> {
    let l = tail_half_width(kind, QUAD_TAIL_MASS);
    let model = probe(kind);
    quad::integrate(
        |x| {
            let phi = model.score(x);
            phi * phi * model.density(x)
        },
        -l,
        l,
        QUAD_TOL,
    )
}

/// Wrap a `Kind` in a throwaway model so the shared evaluators can be used
/// during construction (cached fields unused by score/density).
fn probe(kind: &Kind) -> NoiseModel {
    NoiseModel {
        kind: kind.clone(),
        fisher: f64::NAN,
        score_sup_2nd: f64::NAN,
        score_sup_2nd_numeric: false,
        dissipativity_zeta: None,
    }
}

fn numeric_sup_second_deriv(kind: &Kind, half_width: f64) -> f64 {
    let model = probe(kind);
    let n = 200_000;
    let mut sup = 0.0_f64;
    for i in 0..=n {
        let x = half_width * (i as f64) / (n as f64);
        sup = sup.max(model.score_d2(x).abs());
    }
    sup
}

/// Upper bound on `P(v > x)` for `x` past the mode region.
fn survival_upper_bound(kind: &Kind, x: f64) -> f64 {
    match *kind {
        Kind::Gaussian => (-0.5 * x * x).exp() / (x.max(1.0) * SQRT_2PI),
        Kind::Logistic { s } => (-x / s).exp(),
        Kind::StudentT { dof, k, ln_c } => {
            let u = (x / k).max(1.0);
            let ln_s = ln_c + (dof / ((dof - 1.0) * u)).ln()
                - 0.5 * (dof - 1.0) * (u * u / dof).ln_1p();
            ln_s.exp()
        }
        Kind::Mixture { mu, sigma, .. } => {
            let u = ((x - mu) / sigma).max(1.0);
            (-0.5 * u * u).exp() / (u * SQRT_2PI)
        }
    }
}

fn tail_half_width(kind: &Kind, tail_mass: f64) -> f64 {
    let start = match *kind {
        Kind::Mixture { mu, sigma, .. } => mu + 2.0 * sigma,
        _ => 2.0,
    };
    let mut hi = start;
    let mut iter = 0;
    while 2.0 * survival_upper_bound(kind, hi) > tail_mass {
        hi *= 2.0;
        iter += 1;
        if iter > 2000 {
            break;
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * survival_upper_bound(kind, mid) > tail_mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    1.05 * hi
}

/// Noise model description as it appears in configuration files.
///
/// JSON keys: `family`, `dof`, `weights`, `means`, `sigmas`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<Vec<f64>>,
}

impl NoiseSpec {
    pub fn gaussian() -> Self {
        NoiseSpec { family: Family::Gaussian, dof: None, weights: None, means: None, sigmas: None }
    }

    pub fn logistic() -> Self {
        NoiseSpec { family: Family::Logistic, dof: None, weights: None, means: None, sigmas: None }
    }

    pub fn student_t(dof: f64) -> Self {
        NoiseSpec {
            family: Family::StudentT,
            dof: Some(dof),
            weights: None,
            means: None,
            sigmas: None,
        }
    }

    pub fn gaussian_mixture(weights: Vec<f64>, means: Vec<f64>, sigmas: Vec<f64>) -> Self {
        NoiseSpec {
            family: Family::GaussianMixture,
            dof: None,
            weights: Some(weights),
            means: Some(means),
            sigmas: Some(sigmas),
        }
    }

    /// Parse a shorthand like `gaussian`, `logistic`, or `student_t:5`.
    pub fn parse_shorthand(text: &str) -> Result<Self> {
        let (name, arg) = match text.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (text.trim(), None),
        };
        match (name, arg) {
            ("gaussian", None) => Ok(NoiseSpec::gaussian()),
            ("logistic", None) => Ok(NoiseSpec::logistic()),
            ("student_t", Some(a)) => {
                let dof: f64 = a
                    .parse()
                    .map_err(|_| Error::config(format!("bad student_t dof: {a}")))?;
                Ok(NoiseSpec::student_t(dof))
            }
            _ => Err(Error::config(format!(
                "unknown noise shorthand `{text}` (expected gaussian, logistic, or student_t:<dof>)"
            ))),
        }
    }
}
