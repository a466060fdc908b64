//! Bootstrap particle filter used as a numerical oracle for the optimal
//! filtering MSE.
//!
//! Off the Gaussian case the conditional mean `E[X_t | Y_{1:t}]` has no
//! closed form; a well-resolved particle approximation stands in for it when
//! calibrating how much of the achievable accuracy the recursive filters
//! capture. Log-weights are combined with a max-shift so that heavy-tailed
//! or extremely informative observations (`s_N` near zero) stay finite.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::{mean_and_ci, tail_moments, MseEstimate};
use crate::seed::{derive_seed, replication_seed, rng_from, SALT_PARTICLE, SALT_TRAJECTORY};
use crate::state_space::{Model, Trajectory};

/// Resample when `ESS < threshold * n_particles`.
pub const DEFAULT_RESAMPLE_THRESHOLD: f64 = 0.5;

/// A weighted particle ensemble approximating the filtering distribution.
#[derive(Debug, Clone)]
pub struct ParticleCloud {
    positions: Vec<f64>,
    weights: Vec<f64>,
    ess: f64,
}

impl ParticleCloud {
    /// Point mass of `n_particles` at `x0` (the state is deterministic
    /// before the first transition).
    pub fn new(n_particles: usize, x0: f64) -> Result<Self> {
        if n_particles < 100 {
            return Err(Error::validation(format!(
                "particle count must be >= 100, got {n_particles}"
            )));
        }
        if !x0.is_finite() {
            return Err(Error::validation(format!("x0 must be finite, got {x0}")));
        }
        let n = n_particles;
        Ok(ParticleCloud {
            positions: vec![x0; n],
            weights: vec![1.0 / n as f64; n],
            ess: n as f64,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Effective sample size `1 / sum_i w_i^2`, in `[1, n]`.
    pub fn ess(&self) -> f64 {
        self.ess
    }

    /// Weighted posterior mean.
    pub fn mean(&self) -> f64 {
        self.positions
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * w)
            .sum()
    }

    /// One signal transition per particle: `x <- gamma x + g w`.
    pub fn propagate<R: Rng + ?Sized>(&mut self, model: &Model, rng: &mut R) {
        let gamma = model.gamma();
        let g = model.g();
        for x in &mut self.positions {
            *x = gamma * *x + g * model.signal_noise().sample(rng);
        }
    }

    /// Multiply weights by the observation likelihood of `y` and normalize,
    /// via log-weights with a max-shift. `step` (1-based) is reported if
    /// every log-weight is non-finite.
    pub fn reweight(&mut self, y: f64, model: &Model, step: usize) -> Result<()> {
        let s = model.s();
        let obs = model.obs_noise();
        let mut max_l = f64::NEG_INFINITY;
        for (w, &x) in self.weights.iter_mut().zip(&self.positions) {
            let l = w.ln() + obs.log_density((y - x) / s);
            *w = l;
            if l > max_l {
                max_l = l;
            }
        }
        if !max_l.is_finite() {
            return Err(Error::Degeneracy { step });
        }
        let mut total = 0.0;
        for w in &mut self.weights {
            *w = (*w - max_l).exp();
            total += *w;
        }
        let mut sum_sq = 0.0;
        for w in &mut self.weights {
            *w /= total;
            sum_sq += *w * *w;
        }
        self.ess = 1.0 / sum_sq;
        Ok(())
    }

    /// Systematic resampling: one uniform draw, `n` equally spaced targets
    /// through the cumulative weights. Resets weights to `1/n`.
    pub fn resample_systematic<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.positions.len();
        let u: f64 = rng.random();
        let mut new_positions = Vec::with_capacity(n);
        let mut cum = self.weights[0];
        let mut i = 0;
        for j in 0..n {
            let target = (j as f64 + u) / n as f64;
            while cum < target && i + 1 < n {
                i += 1;
                cum += self.weights[i];
            }
            new_positions.push(self.positions[i]);
        }
        self.positions = new_positions;
        self.weights.fill(1.0 / n as f64);
        self.ess = n as f64;
    }
}

/// Run the bootstrap filter along a trajectory. Particles start as a point
/// mass at 0, matching the simulator's default start; each step is
/// propagate, reweight, record the posterior mean, then resample if the
/// effective sample size fell below `resample_threshold * n_particles`.
pub fn pf_run(
    model: &Model,
    traj: &Trajectory,
    n_particles: usize,
    resample_threshold: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(resample_threshold > 0.0 && resample_threshold <= 1.0) {
        return Err(Error::validation(format!(
            "resample threshold must be in (0, 1], got {resample_threshold}"
        )));
    }
    let mut cloud = ParticleCloud::new(n_particles, 0.0)?;
    let mut rng = rng_from(derive_seed(seed, SALT_PARTICLE));
    let trigger = resample_threshold * n_particles as f64;
    let mut out = Vec::with_capacity(traj.len());
    for (t, &y) in traj.y.iter().enumerate() {
        cloud.propagate(model, &mut rng);
        cloud.reweight(y, model, t + 1)?;
        out.push(cloud.mean());
        if cloud.ess() < trigger {
            cloud.resample_systematic(&mut rng);
        }
    }
    Ok(out)
}

/// Oracle estimate of the optimal stationary MSE: fresh trajectory per
/// replication, particle filter with the default resample threshold,
/// post-burn-in time averages aggregated as in the experiment harness.
/// Replications that degenerate are dropped if they stay at or below 5% of
/// the total; more than that makes the estimate untrustworthy and errors.
pub fn mse_star_estimate(
    model: &Model,
    horizon: usize,
    burn_in: usize,
    n_particles: usize,
    replications: usize,
    seed: u64,
) -> Result<MseEstimate> {
    if burn_in >= horizon {
        return Err(Error::validation(format!(
            "burn_in {burn_in} must be < horizon {horizon}"
        )));
    }
    if replications < 2 {
        return Err(Error::validation(
            "replications must be >= 2 for a confidence interval",
        ));
    }
    let per_rep: Vec<Option<(f64, f64)>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let rep_seed = replication_seed(seed, r as u64);
            let mut rng = rng_from(derive_seed(rep_seed, SALT_TRAJECTORY));
            let traj = model.simulate(horizon, 0.0, &mut rng);
            match pf_run(model, &traj, n_particles, DEFAULT_RESAMPLE_THRESHOLD, rep_seed) {
                Ok(est) => Ok(Some(tail_moments(&est, &traj.x, burn_in))),
                Err(Error::Degeneracy { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let degenerate = per_rep.iter().filter(|m| m.is_none()).count();
    if degenerate * 20 > replications {
        return Err(Error::UnreliableOracle {
            degenerate,
            replications,
        });
    }
    let sq: Vec<f64> = per_rep.iter().flatten().map(|m| m.0).collect();
    let err: Vec<f64> = per_rep.iter().flatten().map(|m| m.1).collect();
    let (mean_sq_error, ci_half_width) = mean_and_ci(&sq);
    let (bias, bias_ci_half_width) = mean_and_ci(&err);
    Ok(MseEstimate {
        filter_mode: "oracle_pf".to_string(),
        mean_sq_error,
        bias,
        ci_half_width,
        bias_ci_half_width,
        replications: sq.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crlb::{batched_bound, default_tau};
    use crate::filters::{kf_gain_schedule, run_filter, FilterMode, GainMode};
    use crate::noise::NoiseModel;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn gauss_model(n: f64, s: f64) -> Model {
        Model::new(n, s, NoiseModel::gaussian(), NoiseModel::gaussian()).unwrap()
    }

    #[test]
    fn cloud_preconditions() {
        assert!(ParticleCloud::new(99, 0.0).is_err());
        assert!(ParticleCloud::new(100, f64::NAN).is_err());
        assert!(ParticleCloud::new(100, 0.0).is_ok());
        let model = gauss_model(100.0, 1.0);
        let traj = model.simulate(10, 0.0, &mut rng_from(1));
        assert!(pf_run(&model, &traj, 200, 0.0, 1).is_err());
        assert!(pf_run(&model, &traj, 200, 1.5, 1).is_err());
        assert!(pf_run(&model, &traj, 99, 0.5, 1).is_err());
    }

    use crate::seed::rng_from;

    #[test]
    fn weights_normalized_and_ess_bounded() {
        let model = Model::new(50.0, 0.5, NoiseModel::gaussian(), NoiseModel::logistic()).unwrap();
        let mut cloud = ParticleCloud::new(500, 0.0).unwrap();
        let mut rng = rng_from(8);
        for step in 1..=20 {
            cloud.propagate(&model, &mut rng);
            cloud.reweight(0.3, &model, step).unwrap();
            let total: f64 = cloud.weights().iter().sum();
            assert_close(total, 1.0, 1e-12);
            let n = cloud.positions().len() as f64;
            assert!(cloud.ess() >= 1.0 && cloud.ess() <= n + 1e-9, "ess {}", cloud.ess());
        }
        cloud.resample_systematic(&mut rng);
        assert_close(cloud.ess(), 500.0, 0.0);
        assert_close(cloud.weights().iter().sum::<f64>(), 1.0, 1e-12);
    }

    #[test]
    fn systematic_resampling_preserves_the_mean() {
        let mut cloud = ParticleCloud::new(10_000, 0.0).unwrap();
        let mut rng = rng_from(21);
        let model = gauss_model(10.0, 1.0);
        cloud.propagate(&model, &mut rng);
        cloud.reweight(0.5, &model, 1).unwrap();
        let before = cloud.mean();
        let sd = {
            let m = before;
            cloud
                .positions()
                .iter()
                .zip(cloud.weights())
                .map(|(x, w)| w * (x - m) * (x - m))
                .sum::<f64>()
                .sqrt()
        };
        cloud.resample_systematic(&mut rng);
        // Systematic resampling adds far less noise than one posterior sd.
        assert!((cloud.mean() - before).abs() <= 0.05 * sd);
    }

    #[test]
    fn pf_is_deterministic_in_the_seed() {
        let model = Model::new(200.0, 2.0, NoiseModel::gaussian(), NoiseModel::student_t(5.0).unwrap()).unwrap();
        let traj = model.simulate(300, 0.0, &mut rng_from(33));
        let a = pf_run(&model, &traj, 300, 0.5, 77).unwrap();
        let b = pf_run(&model, &traj, 300, 0.5, 77).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn degeneracy_reports_the_step() {
        // An observation so large that every particle's squared z-score
        // overflows kills all log-weights at once.
        let model = gauss_model(100.0, 1.0);
        let traj = Trajectory {
            x: vec![0.0; 5],
            y: vec![0.1, -0.2, 1e200, 0.0, 0.0],
        };
        match pf_run(&model, &traj, 200, 0.5, 5) {
            Err(Error::Degeneracy { step }) => assert_eq!(step, 3),
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn near_exact_observations_reproduce_y() {
        // s = 1e-6: the likelihood is razor thin, so the posterior mean must
        // collapse onto (the particle nearest) the observation. Resolving a
        // gap below 1e-4 out of a per-step spread g ~ 0.03 needs a dense
        // cloud.
        let model = Model::new(1e3, 1e-6, NoiseModel::gaussian(), NoiseModel::gaussian()).unwrap();
        let traj = model.simulate(64, 0.0, &mut rng_from(404));
        let est = pf_run(&model, &traj, 400_000, 0.5, 404).unwrap();
        let worst = est
            .iter()
            .zip(&traj.y)
            .map(|(e, y)| (e - y).abs())
            .fold(0.0f64, f64::max);
        assert!(worst <= 1e-4, "worst |estimate - y| = {worst}");
    }

    #[test]
    fn gaussian_oracle_matches_kalman_fixed_point() {
        // With Gaussian noises the optimal filter is the Kalman filter, so
        // the oracle must land on its stationary variance.
        let model = gauss_model(100.0, 1.0);
        let p_inf = kf_gain_schedule(&model, 0, model.stationary_var())
            .unwrap()
            .p_inf;
        let est = mse_star_estimate(&model, 5_000, 1_000, 4_000, 12, 501).unwrap();
        assert_eq!(est.filter_mode, "oracle_pf");
        assert_eq!(est.replications, 12);
        assert!(
            (est.mean_sq_error - p_inf).abs() <= 0.03 * p_inf,
            "oracle {} vs P_inf {p_inf}",
            est.mean_sq_error
        );
    }

    #[test]
    fn oracle_aggregation_matches_manual_recomputation() {
        // The estimate must be exactly the mean over replications of the
        // deterministic per-replication runs (same seed derivation).
        let model = Model::new(100.0, 2.0, NoiseModel::gaussian(), NoiseModel::logistic()).unwrap();
        let (horizon, burn_in, particles, reps, seed) = (2_000, 500, 500, 4, 99);
        let est = mse_star_estimate(&model, horizon, burn_in, particles, reps, seed).unwrap();
        let mut sq = Vec::new();
        for r in 0..reps {
            let rep_seed = replication_seed(seed, r as u64);
            let traj = model.simulate(
                horizon,
                0.0,
                &mut rng_from(derive_seed(rep_seed, SALT_TRAJECTORY)),
            );
            let pf = pf_run(&model, &traj, particles, DEFAULT_RESAMPLE_THRESHOLD, rep_seed).unwrap();
            sq.push(tail_moments(&pf, &traj.x, burn_in).0);
        }
        let manual = sq.iter().sum::<f64>() / sq.len() as f64;
        assert_close(est.mean_sq_error, manual, 1e-15);
    }

    #[test]
    fn oracle_sits_between_bound_and_recursive_filters() {
        // Paired on shared trajectories: crlb - CI <= PF <= best filter + CI.
        let model = Model::new(100.0, 10.0, NoiseModel::gaussian(), NoiseModel::logistic()).unwrap();
        let (horizon, burn_in, particles, reps, seed) = (20_000, 2_000, 2_000, 8, 733);
        let lb = batched_bound(&model, default_tau(&model)).unwrap().lower_bound;
        let mut pf_vals = Vec::new();
        let mut diff_vs_best = Vec::new();
        for r in 0..reps {
            let rep_seed = replication_seed(seed, r as u64);
            let traj = model.simulate(
                horizon,
                0.0,
                &mut rng_from(derive_seed(rep_seed, SALT_TRAJECTORY)),
            );
            let pf = pf_run(&model, &traj, particles, DEFAULT_RESAMPLE_THRESHOLD, rep_seed).unwrap();
            let pf_mse = tail_moments(&pf, &traj.x, burn_in).0;
            let best = [FilterMode::Kf, FilterMode::Gf, FilterMode::Cgf]
                .iter()
                .map(|&mode| {
                    let est = run_filter(&model, &traj, mode, GainMode::Recursive).unwrap();
                    tail_moments(&est, &traj.x, burn_in).0
                })
                .fold(f64::MAX, f64::min);
            pf_vals.push(pf_mse);
            diff_vs_best.push(pf_mse - best);
        }
        let (pf_mean, pf_ci) = mean_and_ci(&pf_vals);
        assert!(
            pf_mean >= lb - pf_ci,
            "oracle {pf_mean} (ci {pf_ci}) below bound {lb}"
        );
        let (diff, diff_ci) = mean_and_ci(&diff_vs_best);
        assert!(
            diff <= diff_ci,
            "oracle beats no filter: paired excess {diff} (ci {diff_ci})"
        );
    }

    #[test]
    fn oracle_preconditions() {
        let model = gauss_model(100.0, 1.0);
        assert!(mse_star_estimate(&model, 100, 100, 200, 4, 1).is_err());
        assert!(mse_star_estimate(&model, 100, 10, 200, 1, 1).is_err());
    }
}
