//! Closed-form regime map over an `(N, s_N)` grid: for each point, the
//! regime label, a recommended filter, the batched information bound at the
//! default batch size, and the stationary MSE predictions of the trivial and
//! recursive filters. No simulation is involved.

use std::io::{self, Write};

use crate::error::Result;
use crate::filters::{gain_schedule, kf_gain_schedule};
use crate::harness::{classify_regime, Regime, DEFAULT_REGIME_CUTOFF};
use crate::noise::NoiseModel;
use crate::state_space::Model;

/// One grid point of the regime map.
#[derive(Debug, Clone)]
pub struct RegimeMapRow {
    pub n: f64,
    pub s: f64,
    pub label: Regime,
    pub recommended_filter: String,
    /// Batched MSE lower bound at `tau = round(s_N)`.
    pub lower_bound: f64,
    /// Stationary signal variance (the all-zeros filter's MSE).
    pub trivial_mean_mse: f64,
    /// `s_N^2` (the raw-observation filter's MSE).
    pub trivial_obs_mse: f64,
    /// Kalman Riccati fixed point.
    pub kf_mse_pred: f64,
    /// Score-filter Riccati fixed point (`iota = I(v)`).
    pub gf_mse_pred: f64,
}

/// Default `N` values for the map.
pub fn default_n_list() -> Vec<f64> {
    vec![1e3, 1e4, 1e5, 1e6]
}

/// Default `s_N/sqrt(N)` ratios: 11 points log-spaced over `[1e-3, 1e2]`.
pub fn default_snr_ratios() -> Vec<f64> {
    (0..11).map(|k| 10f64.powf(-3.0 + 0.5 * k as f64)).collect()
}

fn recommend(label: Regime) -> &'static str {
    match label {
        Regime::NegligibleSnr => "trivial_mean",
        Regime::LargeSnr => "trivial_obs",
        Regime::Balanced => "gf",
        // No score-filter guarantee covers s_N <= 1; fall back to the
        // Kalman baseline and say so.
        Regime::LowSnrWindow => "kf (low-SNR window unresolved; Kalman default)",
    }
}

/// Build the map over `n_list x snr_ratios` (each ratio is `s_N/sqrt(N)`),
/// classifying with [`DEFAULT_REGIME_CUTOFF`]. Rows are ordered by `N`
/// first, then by `s_N`.
pub fn build_regime_map(
    signal: &NoiseModel,
    obs: &NoiseModel,
    n_list: &[f64],
    snr_ratios: &[f64],
) -> Result<Vec<RegimeMapRow>> {
    let mut rows = Vec::with_capacity(n_list.len() * snr_ratios.len());
    for &n in n_list {
        for &ratio in snr_ratios {
            let s = ratio * n.sqrt();
            let model = Model::new(n, s, signal.clone(), obs.clone())?;
            let label = classify_regime(&model, DEFAULT_REGIME_CUTOFF).regime;
            let bound =
                crate::crlb::batched_bound(&model, crate::crlb::default_tau(&model))?;
            let p0 = model.stationary_var();
            rows.push(RegimeMapRow {
                n,
                s,
                label,
                recommended_filter: recommend(label).to_string(),
                lower_bound: bound.lower_bound,
                trivial_mean_mse: model.stationary_var(),
                trivial_obs_mse: s * s,
                kf_mse_pred: kf_gain_schedule(&model, 0, p0)?.p_inf,
                gf_mse_pred: gain_schedule(&model, 0, p0)?.p_inf,
            });
        }
    }
    Ok(rows)
}

/// Write the map as CSV with a header row.
pub fn write_csv<W: Write>(rows: &[RegimeMapRow], out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "N,s_N,label,recommended_filter,lower_bound,trivial_mean_mse,\
         trivial_obs_mse,kf_mse_pred,gf_mse_pred"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.s,
            r.label,
            r.recommended_filter.replace(',', ";"),
            r.lower_bound,
            r.trivial_mean_mse,
            r.trivial_obs_mse,
            r.kf_mse_pred,
            r.gf_mse_pred
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic_map() -> Vec<RegimeMapRow> {
        build_regime_map(
            &NoiseModel::gaussian(),
            &NoiseModel::logistic(),
            &default_n_list(),
            &default_snr_ratios(),
        )
        .unwrap()
    }

    #[test]
    fn default_grid_has_44_ordered_rows() {
        let rows = logistic_map();
        assert_eq!(rows.len(), 44);
        for block in rows.chunks(11) {
            assert!(block.windows(2).all(|w| w[0].n == w[1].n));
            assert!(block.windows(2).all(|w| w[0].s < w[1].s));
        }
    }

    #[test]
    fn labels_cover_all_regimes_and_are_monotone_in_s() {
        let rank = |r: Regime| match r {
            Regime::LargeSnr => 0,
            Regime::LowSnrWindow => 1,
            Regime::Balanced => 2,
            Regime::NegligibleSnr => 3,
        };
        let rows = logistic_map();
        for block in rows.chunks(11) {
            let ranks: Vec<u8> = block.iter().map(|r| rank(r.label)).collect();
            assert!(ranks.windows(2).all(|w| w[1] >= w[0]), "ranks {ranks:?}");
        }
        // The default ratio grid bottoms out at s·sqrt(N) = 1, so LargeSnr
        // needs a wider sweep to show up.
        let ratios: Vec<f64> = (0..15).map(|k| 10f64.powf(-8.0 + 0.7 * k as f64)).collect();
        let wide = build_regime_map(
            &NoiseModel::gaussian(),
            &NoiseModel::logistic(),
            &[1e4],
            &ratios,
        )
        .unwrap();
        for want in [
            Regime::LargeSnr,
            Regime::LowSnrWindow,
            Regime::Balanced,
            Regime::NegligibleSnr,
        ] {
            assert!(
                rows.iter().chain(&wide).any(|r| r.label == want),
                "missing {want:?}"
            );
        }
        let ranks: Vec<u8> = wide.iter().map(|r| rank(r.label)).collect();
        assert!(ranks.windows(2).all(|w| w[1] >= w[0]), "ranks {ranks:?}");
    }

    #[test]
    fn pinned_extreme_rows() {
        // Negligible SNR: observations carry nothing, the bound collapses to
        // the stationary variance and the zero filter is recommended.
        let row = logistic_map()
            .into_iter()
            .find(|r| r.n == 1e4 && (r.s - 1e4).abs() < 1e-6)
            .unwrap();
        assert_eq!(row.label, Regime::NegligibleSnr);
        assert_eq!(row.recommended_filter, "trivial_mean");
        assert!((row.lower_bound - 0.5).abs() <= 1e-3, "lb {}", row.lower_bound);

        // Large SNR (off the default grid): y is nearly exact, echoing it is
        // recommended and its MSE is s^2.
        let rows = build_regime_map(
            &NoiseModel::gaussian(),
            &NoiseModel::logistic(),
            &[1e4],
            &[1e-5],
        )
        .unwrap();
        let row = &rows[0];
        assert!((row.s - 1e-3).abs() < 1e-15);
        assert_eq!(row.label, Regime::LargeSnr);
        assert_eq!(row.recommended_filter, "trivial_obs");
        assert!((row.trivial_obs_mse - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn recommendations_match_labels() {
        for row in logistic_map() {
            let want = match row.label {
                Regime::NegligibleSnr => "trivial_mean",
                Regime::LargeSnr => "trivial_obs",
                Regime::Balanced => "gf",
                Regime::LowSnrWindow => "kf",
            };
            assert!(
                row.recommended_filter.starts_with(want),
                "label {:?} recommends {}",
                row.label,
                row.recommended_filter
            );
        }
        // The unresolved window must say so rather than claim a guarantee.
        let low = logistic_map()
            .into_iter()
            .find(|r| r.label == Regime::LowSnrWindow)
            .unwrap();
        assert!(low.recommended_filter.contains("unresolved"));
    }

    #[test]
    fn score_filter_prediction_beats_kalman_iff_obs_non_gaussian() {
        for row in logistic_map() {
            assert!(
                row.gf_mse_pred < row.kf_mse_pred,
                "N={} s={}: gf {} !< kf {}",
                row.n,
                row.s,
                row.gf_mse_pred,
                row.kf_mse_pred
            );
        }
        let gaussian_rows = build_regime_map(
            &NoiseModel::gaussian(),
            &NoiseModel::gaussian(),
            &default_n_list(),
            &default_snr_ratios(),
        )
        .unwrap();
        for row in gaussian_rows {
            assert_eq!(row.gf_mse_pred, row.kf_mse_pred);
        }
    }

    #[test]
    fn bound_sits_below_every_prediction() {
        for row in logistic_map() {
            let best = row
                .gf_mse_pred
                .min(row.kf_mse_pred)
                .min(row.trivial_mean_mse)
                .min(row.trivial_obs_mse);
            assert!(
                row.lower_bound <= best * (1.0 + 1e-12),
                "N={} s={}: bound {} above best prediction {}",
                row.n,
                row.s,
                row.lower_bound,
                best
            );
        }
    }

    #[test]
    fn pinned_balanced_row() {
        let rows = logistic_map();
        // N = 1e4, ratio = 1 -> s = 100: the balanced showcase point.
        let row = rows
            .iter()
            .find(|r| r.n == 1e4 && (r.s - 100.0).abs() < 1e-9)
            .unwrap();
        assert_eq!(row.label, Regime::Balanced);
        assert_eq!(row.recommended_filter, "gf");
        assert!((row.trivial_obs_mse - 1e4).abs() < 1e-6);
        assert!(row.kf_mse_pred > row.gf_mse_pred);
        assert!(row.lower_bound > 0.38 && row.lower_bound < row.gf_mse_pred);
    }

    #[test]
    fn csv_shape() {
        let rows = logistic_map();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 45);
        assert!(lines[0].starts_with("N,s_N,label,"));
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 9, "bad row {line}");
        }
    }
}
