//! Cramér–Rao machinery: the unbatched posterior bound, the batched
//! information recursion with its closed-form stationary point, and the
//! Kalman-vs-Goggin stationary gap.
//!
//! Batching groups `tau` steps; the accumulated signal noise
//! `W_k = (1/sqrt N) Σ_{s=1}^{tau} gamma^{s-1} w` has variance
//! `Sigma_W = (1 - gamma^{2tau}) / (N(1 - gamma^2))`, and the per-batch
//! observation information is
//! `eIVe = (I(v)/s^2) gamma^2 (1 - gamma^{2tau}) / (gamma^{2tau}(1 - gamma^2))`.
//! The batched information recursion
//!
//! ```text
//! J'  =  eIVe + J·Sigma_W^{-1} / (J + gamma^{2tau} Sigma_W^{-1})
//! ```
//!
//! has the stationary point `J_inf = [b + sqrt(b^2 + 4c)]/2` where two exact
//! simplifications keep everything stable for large `N` and `tau`:
//! `(1 - gamma^{2tau})/Sigma_W = N(1 - gamma^2) = 2 - 1/N` and
//! `eIVe·gamma^{2tau}/Sigma_W = gamma^2 N I(v)/s^2`, so
//! `b = eIVe + (2 - 1/N)` and `c = gamma^2 N I(v)/s^2`.

use crate::error::{Error, Result};
use crate::state_space::Model;

/// Iterates stored from the recursion consistency check.
const TRACE_CAP: usize = 10_000;

/// Batch-level constants for a given `tau`.
#[derive(Debug, Clone, Copy)]
pub struct BatchParams {
    pub tau: u64,
    /// Variance of the accumulated batch noise `W_k`.
    pub sigma_w: f64,
    /// Per-batch observation information `e' I(V) e`.
    pub e_ive: f64,
    /// `gamma^{2 tau}`, evaluated in log space.
    pub gamma_2tau: f64,
    /// `1 - gamma^{2 tau}` without cancellation.
    pub one_minus_gamma_2tau: f64,
    /// Set when `tau > N`, outside the batching regime.
    pub out_of_regime: bool,
}

/// Stationary batched bound plus diagnostics.
#[derive(Debug, Clone)]
pub struct CrlbResult {
    pub tau: u64,
    /// Closed-form stationary information.
    pub bar_j_inf: f64,
    /// `1 / bar_j_inf`, the batched MSE lower bound.
    pub lower_bound: f64,
    /// Order of the bound's slack, `1/(tau·bar_j_inf)`; reported, never
    /// subtracted.
    pub slack_order: f64,
    /// Recursion iterates from `J_0 = 1` (capped at `TRACE_CAP`).
    pub bar_j_trace: Vec<f64>,
    /// Whether the iteration reached a fixed point within the cap.
    pub recursion_converged: bool,
    /// Unbatched posterior information `J`.
    pub unbatched_j: f64,
    pub out_of_regime: bool,
}

/// Default batch size `round(s)`, clamped to at least 1.
pub fn default_tau(model: &Model) -> u64 {
    model.s().round().max(1.0) as u64
}

pub fn batch_params(model: &Model, tau: u64) -> Result<BatchParams> {
    if tau == 0 {
        return Err(Error::validation("tau must be >= 1"));
    }
    let t = tau as f64;
    let gamma_2tau = model.gamma_pow2(t);
    let one_minus = model.one_minus_gamma_pow2(t);
    let d = 2.0 - 1.0 / model.n();
    let sigma_w = one_minus / d;
    let iv = model.obs_noise().fisher_information();
    let s2 = model.s() * model.s();
    let gamma2 = model.gamma() * model.gamma();
    let e_ive = (iv / s2) * gamma2 * one_minus / (gamma_2tau * (1.0 - gamma2));
    Ok(BatchParams {
        tau,
        sigma_w,
        e_ive,
        gamma_2tau,
        one_minus_gamma_2tau: one_minus,
        out_of_regime: t > model.n(),
    })
}

/// One step of the batched information recursion.
pub fn recursion_step(batch: &BatchParams, j: f64) -> f64 {
    let inv_sigma = 1.0 / batch.sigma_w;
    batch.e_ive + j * inv_sigma / (j + batch.gamma_2tau * inv_sigma)
}

/// Closed-form stationary point of the batched recursion.
pub fn bar_j_closed_form(model: &Model, batch: &BatchParams) -> f64 {
    let b = batch.e_ive + (2.0 - 1.0 / model.n());
    let gamma2 = model.gamma() * model.gamma();
    let c = gamma2 * model.n() * model.obs_noise().fisher_information()
        / (model.s() * model.s());
    0.5 * (b + (b * b + 4.0 * c).sqrt())
}

/// Stationary batched bound: closed form, recursion trace from `J_0 = 1`,
/// slack order, and the unbatched comparison value.
pub fn bar_j_stationary(model: &Model, batch: &BatchParams) -> CrlbResult {
    let bar_j_inf = bar_j_closed_form(model, batch);
    let mut trace = Vec::new();
    let mut j = 1.0_f64;
    let mut converged = false;
    for _ in 0..TRACE_CAP {
        let next = recursion_step(batch, j);
        trace.push(next);
        if (next - j).abs() <= 1e-13 * next {
            converged = true;
            break;
        }
        j = next;
    }
    CrlbResult {
        tau: batch.tau,
        bar_j_inf,
        lower_bound: 1.0 / bar_j_inf,
        slack_order: 1.0 / (batch.tau as f64 * bar_j_inf),
        bar_j_trace: trace,
        recursion_converged: converged,
        unbatched_j: unbatched_j(model),
        out_of_regime: batch.out_of_regime,
    }
}

/// Convenience: batched bound at a given `tau` in one call.
pub fn batched_bound(model: &Model, tau: u64) -> Result<CrlbResult> {
    let batch = batch_params(model, tau)?;
    Ok(bar_j_stationary(model, &batch))
}

/// Unbatched posterior information
/// `J = [A + sqrt(A^2 + 4 gamma^2 Q R)]/2` with `Q = N I(w)`,
/// `R = I(v)/s^2`, `A = R + (1 - gamma^2) Q`.
pub fn unbatched_j(model: &Model) -> f64 {
    let iw = model.signal_noise().fisher_information();
    let iv = model.obs_noise().fisher_information();
    let s2 = model.s() * model.s();
    let r = iv / s2;
    let a = r + (2.0 - 1.0 / model.n()) * iw;
    let gamma2 = model.gamma() * model.gamma();
    let c = gamma2 * model.n() * iw * r;
    0.5 * (a + (a * a + 4.0 * c).sqrt())
}

/// The classical (loose) posterior bound `1/J`.
pub fn unbatched_crlb(model: &Model) -> f64 {
    1.0 / unbatched_j(model)
}

/// Stationary information of the Goggin filter, `1/P_inf`.
pub fn goggin_stationary_j(model: &Model) -> f64 {
    stationary_j_with_info(model, model.obs_noise().fisher_information())
}

/// Stationary information of the Kalman baseline.
pub fn kf_stationary_j(model: &Model) -> f64 {
    stationary_j_with_info(model, 1.0)
}

fn stationary_j_with_info(model: &Model, iota: f64) -> f64 {
    let s2 = model.s() * model.s();
    let a = (2.0 - 1.0 / model.n()) + iota / s2;
    let gamma2 = model.gamma() * model.gamma();
    let c = gamma2 * model.n() * iota / s2;
    0.5 * (a + (a * a + 4.0 * c).sqrt())
}

/// Stationary MSE gap of the Kalman filter relative to the Goggin filter.
#[derive(Debug, Clone, Copy)]
pub struct GapReport {
    /// `1/J_kf - 1/J_gf >= 0`.
    pub abs_gap: f64,
    /// `abs_gap · J_gf = J_gf/J_kf - 1`.
    pub rel_gap: f64,
}

pub fn kf_suboptimality_gap(model: &Model) -> GapReport {
    let j_gf = goggin_stationary_j(model);
    let j_kf = kf_stationary_j(model);
    let abs_gap = 1.0 / j_kf - 1.0 / j_gf;
    GapReport {
        abs_gap,
        rel_gap: abs_gap * j_gf,
    }
}

/// Least-squares slope of `log(lower_bound)` against `log(s)` with the
/// default `tau = round(s)` at each point.
pub fn scaling_slope(n: f64, s_values: &[f64], signal: &crate::noise::NoiseModel, obs: &crate::noise::NoiseModel) -> Result<f64> {
    if s_values.len() < 2 {
        return Err(Error::validation("need at least two s values for a slope"));
    }
    let mut xs = Vec::with_capacity(s_values.len());
    let mut ys = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let model = Model::new(n, s, signal.clone(), obs.clone())?;
        let result = batched_bound(&model, default_tau(&model))?;
        xs.push(s.ln());
        ys.push(result.lower_bound.ln());
    }
    Ok(least_squares_slope(&xs, &ys))
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - x_bar) * (y - y_bar);
        den += (x - x_bar) * (x - x_bar);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters;
    use crate::noise::NoiseModel;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn model(n: f64, s: f64, signal: NoiseModel, obs: NoiseModel) -> Model {
        Model::new(n, s, signal, obs).unwrap()
    }

    fn gaussian(n: f64, s: f64) -> Model {
        model(n, s, NoiseModel::gaussian(), NoiseModel::gaussian())
    }

    /// Kahan-compensated sum.
    fn kahan<I: Iterator<Item = f64>>(iter: I) -> f64 {
        let (mut sum, mut carry) = (0.0_f64, 0.0_f64);
        for v in iter {
            let y = v - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
        sum
    }

    #[test]
    fn tau_one_batch_params_are_single_terms() {
        for obs in [NoiseModel::gaussian(), NoiseModel::logistic()] {
            let m = model(1e4, 100.0, NoiseModel::gaussian(), obs);
            let b = batch_params(&m, 1).unwrap();
            assert_close(b.sigma_w, 1.0 / 1e4, 1e-12 * 1e-4);
            let expected = m.obs_noise().fisher_information() / (100.0 * 100.0);
            assert_close(b.e_ive, expected, 1e-12 * expected);
            assert!(!b.out_of_regime);
        }
    }

    #[test]
    fn batch_params_match_direct_sums() {
        for (n, tau) in [(1e4, 100u64), (50.0, 50u64), (1e4, 10_000u64)] {
            let m = gaussian(n, 100.0);
            let b = batch_params(&m, tau).unwrap();
            let ln_g = (-1.0 / n).ln_1p();
            let sigma_direct = kahan((0..tau).map(|s| (2.0 * s as f64 * ln_g).exp())) / n;
            assert!(
                (b.sigma_w - sigma_direct).abs() <= 1e-12 * sigma_direct,
                "sigma_w {} vs direct {}",
                b.sigma_w,
                sigma_direct
            );
            let iv = m.obs_noise().fisher_information();
            let e_direct =
                kahan((0..tau).map(|s| (-2.0 * s as f64 * ln_g).exp())) * iv / (m.s() * m.s());
            assert!(
                (b.e_ive - e_direct).abs() <= 1e-12 * e_direct,
                "e_ive {} vs direct {}",
                b.e_ive,
                e_direct
            );
        }
    }

    #[test]
    fn batch_params_order_of_magnitude() {
        let m = gaussian(1e4, 100.0);
        let b = batch_params(&m, 100).unwrap();
        assert!((b.sigma_w - 0.01).abs() <= 0.02 * 0.01);
        let expected = 100.0 / (100.0 * 100.0);
        assert!((b.e_ive - expected).abs() <= 0.02 * expected);
    }

    #[test]
    fn negligible_snr_bar_j_is_two() {
        let m = gaussian(1e4, 1e4);
        let res = batched_bound(&m, 10_000).unwrap();
        assert!((res.bar_j_inf - 2.0).abs() <= 0.05, "bar J = {}", res.bar_j_inf);
        assert!((0.45..=0.52).contains(&res.lower_bound));
        assert!(res.recursion_converged);
    }

    #[test]
    fn recursion_reaches_closed_form_within_cap() {
        let balanced = gaussian(1e4, 100.0);
        for (m, tau) in [(&balanced, 100u64), (&gaussian(1e4, 1e4), 10_000u64)] {
            let res = batched_bound(m, tau).unwrap();
            assert!(res.recursion_converged);
            assert!(res.bar_j_trace.len() <= 10_000);
            let last = *res.bar_j_trace.last().unwrap();
            assert!(
                (last - res.bar_j_inf).abs() <= 1e-10 * res.bar_j_inf,
                "iterated {last} vs closed {}",
                res.bar_j_inf
            );
        }
    }

    #[test]
    fn unbatched_gaussian_equals_kf_fixed_point() {
        for (n, s) in [(1e2, 1.0), (1e4, 100.0), (1e6, 31.6)] {
            let m = gaussian(n, s);
            let sched = filters::kf_gain_schedule(&m, 0, m.stationary_var()).unwrap();
            assert_close(unbatched_crlb(&m), sched.p_inf, 1e-12 * sched.p_inf);
        }
    }

    #[test]
    fn unbatched_limit_large_s() {
        let m = gaussian(1e4, 1e8);
        assert!((unbatched_crlb(&m) - 0.5).abs() <= 1e-3);
        let logistic_w = model(1e4, 1e8, NoiseModel::logistic(), NoiseModel::gaussian());
        let bound = unbatched_crlb(&logistic_w);
        assert!(bound < 0.49, "non-Gaussian signal noise must be loose: {bound}");
        // 1/((2 - 1/N) I(w)) with I(w) = pi^2/9.
        assert_close(bound, 1.0 / (1.9999 * std::f64::consts::PI.powi(2) / 9.0), 1e-4);
    }

    #[test]
    fn goggin_j_matches_gain_schedule() {
        let models = [
            model(1e4, 100.0, NoiseModel::gaussian(), NoiseModel::logistic()),
            model(1e3, 10.0, NoiseModel::gaussian(), NoiseModel::student_t(5.0).unwrap()),
            model(1e5, 300.0, NoiseModel::gaussian(), NoiseModel::gaussian()),
        ];
        for m in models {
            let j = goggin_stationary_j(&m);
            let sched = filters::gain_schedule(&m, 0, m.stationary_var()).unwrap();
            assert_close(1.0 / j, sched.p_inf, 1e-10 * sched.p_inf);
        }
    }

    #[test]
    fn gaussian_gap_is_zero() {
        let gap = kf_suboptimality_gap(&gaussian(1e4, 100.0));
        assert_eq!(gap.abs_gap, 0.0);
        assert_eq!(gap.rel_gap, 0.0);
    }

    #[test]
    fn logistic_gap_value_and_stability() {
        let gap4 = kf_suboptimality_gap(&model(
            1e4,
            100.0,
            NoiseModel::gaussian(),
            NoiseModel::logistic(),
        ));
        assert!(gap4.abs_gap > 0.0);
        assert_close(gap4.rel_gap, 0.013986, 5e-5);
        let gap6 = kf_suboptimality_gap(&model(
            1e6,
            1000.0,
            NoiseModel::gaussian(),
            NoiseModel::logistic(),
        ));
        let ratio = gap6.rel_gap / gap4.rel_gap;
        assert!((0.8..=1.25).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn heavier_tails_widen_the_gap() {
        let logistic = kf_suboptimality_gap(&model(
            1e4,
            100.0,
            NoiseModel::gaussian(),
            NoiseModel::logistic(),
        ));
        let t5 = kf_suboptimality_gap(&model(
            1e4,
            100.0,
            NoiseModel::gaussian(),
            NoiseModel::student_t(5.0).unwrap(),
        ));
        assert!(t5.rel_gap > logistic.rel_gap);
    }

    #[test]
    fn batched_bound_tightens_non_gaussian_signal() {
        let signals = [
            NoiseModel::logistic(),
            NoiseModel::student_t(5.0).unwrap(),
            NoiseModel::gaussian_mixture(&[0.5, 0.5], &[3.0, -3.0], &[1.0, 1.0]).unwrap(),
        ];
        for n in [1e3f64, 1e4, 1e6] {
            for ratio in [0.001, 0.01, 0.1, 1.0, 10.0, 100.0] {
                let s = ratio * n.sqrt();
                for signal in &signals {
                    let m = model(n, s, signal.clone(), NoiseModel::gaussian());
                    let res = batched_bound(&m, default_tau(&m)).unwrap();
                    assert!(
                        res.lower_bound >= 1.0 / res.unbatched_j - 1e-12,
                        "N={n} s={s}: batched {} vs unbatched {}",
                        res.lower_bound,
                        1.0 / res.unbatched_j
                    );
                    assert!(res.lower_bound <= m.stationary_var() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn batching_gain_must_beat_batching_slack() {
        // The batched bound beats the unbatched one only once
        // tau·(I(w) - 1) outweighs the O(1/tau) batching slack. A mixture
        // with I(w) ≈ 1.018 sits below that crossover at tau = 3 and above
        // it at tau = 32.
        let weak = NoiseModel::gaussian_mixture(&[0.5, 0.5], &[0.6, -0.6], &[0.8, 0.8]).unwrap();
        let n = 1e3f64;
        let near = model(n, 0.1 * n.sqrt(), weak.clone(), NoiseModel::gaussian());
        let res = batched_bound(&near, default_tau(&near)).unwrap();
        assert!(res.lower_bound < 1.0 / res.unbatched_j);
        let far = model(n, n.sqrt(), weak, NoiseModel::gaussian());
        let res = batched_bound(&far, default_tau(&far)).unwrap();
        assert!(res.lower_bound > 1.0 / res.unbatched_j);
    }

    #[test]
    fn gaussian_signal_tau_one_bounds_agree() {
        for (n, s) in [(1e3, 5.0), (1e4, 100.0), (1e6, 0.5)] {
            let m = model(n, s, NoiseModel::gaussian(), NoiseModel::logistic());
            let res = batched_bound(&m, 1).unwrap();
            assert_close(
                res.lower_bound,
                1.0 / res.unbatched_j,
                1e-9 * res.lower_bound,
            );
        }
    }

    #[test]
    fn recursion_is_monotone_contraction() {
        let m = gaussian(1e4, 100.0);
        let batch = batch_params(&m, 100).unwrap();
        let j_star = bar_j_closed_form(&m, &batch);
        for start in [0.01, 1.0, 10.0 * j_star, 1000.0] {
            let mut j = start;
            let mut dist = (j - j_star).abs();
            for _ in 0..50 {
                j = recursion_step(&batch, j);
                let next_dist = (j - j_star).abs();
                assert!(
                    next_dist <= dist + 1e-12,
                    "distance grew from {dist} to {next_dist} (start {start})"
                );
                dist = next_dist;
            }
        }
    }

    #[test]
    fn lower_bound_scales_linearly_in_s_before_saturation() {
        // Theta(s/sqrt N) window: unit log-log slope while s << sqrt N;
        // the bound bends toward the prior variance as s approaches sqrt N.
        let n: f64 = 1e6;
        let s_values: Vec<f64> = [0.2, 0.25, 0.3].iter().map(|e| n.powf(*e)).collect();
        let slope = scaling_slope(
            n,
            &s_values,
            &NoiseModel::gaussian(),
            &NoiseModel::gaussian(),
        )
        .unwrap();
        assert!((slope - 1.0).abs() <= 0.1, "slope {slope}");
    }

    #[test]
    fn default_tau_rounds_s() {
        assert_eq!(default_tau(&gaussian(1e4, 100.0)), 100);
        assert_eq!(default_tau(&gaussian(1e4, 0.4)), 1);
        assert_eq!(default_tau(&gaussian(1e4, 31.6)), 32);
    }

    #[test]
    fn out_of_regime_flag_set_without_error() {
        let m = gaussian(100.0, 1.0);
        let res = batched_bound(&m, 1000).unwrap();
        assert!(res.out_of_regime);
        assert!(res.bar_j_inf.is_finite());
        assert!(batch_params(&m, 0).is_err());
    }

    #[test]
    fn slack_order_reported() {
        let m = gaussian(1e4, 100.0);
        let res = batched_bound(&m, 100).unwrap();
        assert_close(res.slack_order, 1.0 / (100.0 * res.bar_j_inf), 1e-15);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn closed_form_is_a_fixed_point(
                n_exp in 1.0f64..6.0,
                ratio_exp in -2.0f64..1.5,
                tau_frac in 0.001f64..1.0,
            ) {
                let n = 10f64.powf(n_exp);
                let s = 10f64.powf(ratio_exp) * n.sqrt();
                let m = gaussian(n, s);
                let tau = ((tau_frac * n) as u64).max(1);
                let batch = batch_params(&m, tau).unwrap();
                let j = bar_j_closed_form(&m, &batch);
                let stepped = recursion_step(&batch, j);
                prop_assert!((stepped - j).abs() <= 1e-9 * j, "{} vs {}", stepped, j);
                prop_assert!(1.0 / j <= m.stationary_var() + 1e-9);
                let b = batch.e_ive + (2.0 - 1.0 / n);
                prop_assert!(j >= b - 1e-12 * b);
            }
        }
    }
}
