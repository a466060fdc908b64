//! FFT-grid density engine for weighted sums of independent noise draws.
//!
//! Builds the density of `W = Σ_i a_i·w_i` (`w_i` i.i.d. from a [`NoiseModel`])
//! on a uniform grid by iterated FFT convolution, then evaluates moment and
//! Fisher functionals of the gridded density. The main consumer is the
//! Fisher-information CLT check: with the batch weight profile
//! `a_s = γ^{s-1}/√N`, the excess `δ(τ) = I(W)·Var(W) − 1` is nonnegative and
//! decays like `O(1/τ)`, with equality only in the Gaussian case.

use std::io;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;

/// Default grid resolution.
pub const DEFAULT_N_POINTS: usize = 1 << 14;
/// Densities at or below this value contribute nothing to the Fisher
/// functional; avoids spurious infinities from `(f')²/f` on underflowed cells.
pub const DENSITY_FLOOR: f64 = 1e-300;
/// Auto-sizing widens the grid until every scaled component density falls
/// below this value at the boundary.
const COMPONENT_DENSITY_CUTOFF: f64 = 1e-14;
/// Maximum tolerated probability mass outside the grid.
const TAIL_MASS_LIMIT: f64 = 1e-10;
/// The outer `1/EDGE_DIVISOR` of cells on each side form the guard band used
/// to detect an undersized grid after convolution.
const EDGE_DIVISOR: usize = 40;

/// Grid sizing request for [`density_of_weighted_sum`].
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    /// Explicit half-width `L`; `None` selects the automatic width
    /// `max(12·sd(W), componentwise density cutoff point)`.
    pub half_width: Option<f64>,
    /// Number of grid points; must be a power of two in `[64, 2^22]`.
    pub n_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_width: None,
            n_points: DEFAULT_N_POINTS,
        }
    }
}

/// A probability density sampled on the uniform grid
/// `x_j = -L + j·dx`, `j = 0..n`, `dx = 2L/n` (the right endpoint is
/// excluded, as the FFT convolution treats the grid periodically).
///
/// Invariants: the trapezoid integral of `values` is `1 ± 1e-6` and every
/// value is nonnegative; cells at or below [`DENSITY_FLOOR`] are treated as
/// carrying no mass by the Fisher functional.
#[derive(Clone, Debug)]
pub struct DensityGrid {
    pub half_width: f64,
    pub n_points: usize,
    pub values: Vec<f64>,
    pub dx: f64,
}

impl DensityGrid {
    /// Abscissa of cell `j`.
    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + (j as f64) * self.dx
    }

    /// Trapezoid integral of the sampled density.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.values, self.dx)
    }

    /// Trapezoid mean `∫ x f(x) dx`.
    pub fn mean(&self) -> f64 {
        let weighted: Vec<f64> = (0..self.n_points)
            .map(|j| self.x(j) * self.values[j])
            .collect();
        trapezoid(&weighted, self.dx)
    }

    /// Trapezoid central second moment `∫ (x − mean)² f(x) dx`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let weighted: Vec<f64> = (0..self.n_points)
            .map(|j| {
                let c = self.x(j) - m;
                c * c * self.values[j]
            })
            .collect();
        trapezoid(&weighted, self.dx)
    }
}

/// Fisher functional of a grid together with flooring diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct FisherOutcome {
    /// Discrete `∫ (f')²/f dx` with fourth-order central differences.
    pub fisher: f64,
    /// Fraction of the grid's mass carried by cells at or below
    /// [`DENSITY_FLOOR`].
    pub floor_mass_fraction: f64,
    /// Set when more than 1% of the mass sits at the floor. Cannot trigger
    /// for a normalized grid (floored cells carry ≤ 1e-300 each); it is a
    /// tripwire for grids whose mass underflowed upstream, where the
    /// functional would silently return garbage.
    pub floor_warning: bool,
}

/// One Fisher-information CLT measurement at batch length `tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfoReport {
    pub tau: usize,
    pub variance: f64,
    pub fisher: f64,
    /// `δ = I(W)·Var(W) − 1 ≥ 0`, zero exactly for Gaussian noise.
    pub product_minus_one: f64,
}

/// Output of [`clt_rate_experiment`]: per-`τ` reports plus the fitted
/// log–log slope of `δ` against `τ` (NaN when fewer than two positive `δ`).
#[derive(Clone, Debug)]
pub struct CltReport {
    pub reports: Vec<InfoReport>,
    pub slope_fit: f64,
}

impl CltReport {
    /// CSV with header `tau,variance,fisher,delta,slope_fit`; the fitted
    /// slope is repeated on every row.
    pub fn write_csv<W: io::Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "tau,variance,fisher,delta,slope_fit")?;
        for r in &self.reports {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.tau, r.variance, r.fisher, r.product_minus_one, self.slope_fit
            )?;
        }
        Ok(())
    }
}

/// Density of `Σ_i a_i·w_i` by sampling each scaled component on the grid
/// and convolving iteratively via FFT (largest `|a_i|` first), then
/// renormalizing.
///
/// Errors when the grid is too narrow: either a component's closed-form tail
/// bound leaves more than `1e-10` mass outside `(-L, L)`, or the convolved
/// density carries visible mass in the outer guard band. Both messages name
/// the required half-width.
pub fn density_of_weighted_sum(
    model: &NoiseModel,
    weights: &[f64],
    spec: GridSpec,
) -> Result<DensityGrid> {
    if weights.is_empty() {
        return Err(Error::validation("weights must be nonempty"));
    }
    if weights.iter().any(|a| !a.is_finite() || *a == 0.0) {
        return Err(Error::validation("weights must be finite and nonzero"));
    }
    let n = spec.n_points;
    if !n.is_power_of_two() || !(64..=(1 << 22)).contains(&n) {
        return Err(Error::validation(format!(
            "n_points must be a power of two in [64, 2^22], got {n}"
        )));
    }

    let mut mags: Vec<f64> = weights.iter().map(|a| a.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let required = required_half_width(model, &mags);
    let l = spec.half_width.unwrap_or(required);
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::validation("half_width must be positive and finite"));
    }
    let tail_bound: f64 = mags.iter().map(|a| model.tail_mass_outside(l / a)).sum();
    if tail_bound >= TAIL_MASS_LIMIT {
        return Err(Error::numeric(format!(
            "grid half-width {l:.6e} leaves component tail mass {tail_bound:.3e} \
             outside the grid; use half-width >= {required:.6e}"
        )));
    }

    let dx = 2.0 * l / (n as f64);
    let sample = |a: f64| -> Vec<f64> {
        (0..n)
            .map(|j| {
                let x = -l + (j as f64) * dx;
                model.density(x / a) / a
            })
            .collect()
    };

    let mut values = sample(mags[0]);
    let mut planner = FftPlanner::<f64>::new();
    for &a in &mags[1..] {
        let comp = sample(a);
        values = fft_convolve(&values, &comp, dx, &mut planner);
    }

    let total = trapezoid(&values, dx);
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::numeric("convolved density has no mass on the grid"));
    }
    let guard = n / EDGE_DIVISOR;
    let edge: f64 = values[..guard]
        .iter()
        .chain(&values[n - guard..])
        .sum::<f64>()
        * dx;
    if edge / total >= TAIL_MASS_LIMIT {
        return Err(Error::numeric(format!(
            "convolved density carries mass {:.3e} in the outer guard band at \
             half-width {l:.6e}; use half-width >= {:.6e}",
            edge / total,
            (2.0 * l).max(required)
        )));
    }

    for v in &mut values {
        *v /= total;
    }
    Ok(DensityGrid {
        half_width: l,
        n_points: n,
        values,
        dx,
    })
}

/// Automatic half-width: `max(12·sd(W), per-component density cutoff point)`,
/// widened further if the closed-form tail bound demands it.
fn required_half_width(model: &NoiseModel, mags: &[f64]) -> f64 {
    let sd: f64 = mags.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut l = 12.0 * sd;
    for &a in mags {
        l = l.max(a * model.tail_point_below_density(COMPONENT_DENSITY_CUTOFF * a));
    }
    for _ in 0..60 {
        let bound: f64 = mags.iter().map(|a| model.tail_mass_outside(l / a)).sum();
        if bound < TAIL_MASS_LIMIT {
            break;
        }
        l *= 1.25;
    }
    l
}

/// Circular FFT convolution of two grid-sampled densities; the half-grid
/// rotation re-centers the origin, and Riemann scaling by `dx` turns the
/// discrete sum into the convolution integral. Sign noise from roundoff is
/// folded back by absolute value to keep the density nonnegative.
fn fft_convolve(f: &[f64], g: &[f64], dx: f64, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = f.len();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut fa: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut ga: Vec<Complex<f64>> = g.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut fa);
    fft.process(&mut ga);
    for (a, b) in fa.iter_mut().zip(&ga) {
        *a *= *b;
    }
    ifft.process(&mut fa);
    let scale = dx / (n as f64);
    let mut out: Vec<f64> = fa.iter().map(|c| (c.re * scale).abs()).collect();
    out.rotate_left(n / 2);
    out
}

fn trapezoid(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    let interior: f64 = values[1..n - 1].iter().sum();
    dx * (interior + 0.5 * (values[0] + values[n - 1]))
}

/// Discrete Fisher functional `∫ (f')²/f dx` with `f'` from fourth-order
/// central differences (out-of-range samples are zero). Cells at or below
/// [`DENSITY_FLOOR`] contribute nothing.
pub fn fisher_of_grid(grid: &DensityGrid) -> f64 {
    fisher_of_grid_checked(grid).fisher
}

/// [`fisher_of_grid`] with flooring diagnostics.
pub fn fisher_of_grid_checked(grid: &DensityGrid) -> FisherOutcome {
    let n = grid.n_points;
    let dx = grid.dx;
    let v = |j: isize| -> f64 {
        if j < 0 || j >= n as isize {
            0.0
        } else {
            grid.values[j as usize]
        }
    };
    let mut total = 0.0;
    let mut floor_mass = 0.0;
    let mut live_mass = 0.0;
    for j in 0..n {
        let f = grid.values[j];
        if f <= DENSITY_FLOOR {
            floor_mass += f.max(0.0) * dx;
            continue;
        }
        live_mass += f * dx;
        let ji = j as isize;
        let d = (-v(ji + 2) + 8.0 * v(ji + 1) - 8.0 * v(ji - 1) + v(ji - 2)) / (12.0 * dx);
        let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        total += w * d * d / f;
    }
    let mass = floor_mass + live_mass;
    let floor_mass_fraction = if mass > 0.0 { floor_mass / mass } else { 1.0 };
    FisherOutcome {
        fisher: total * dx,
        floor_mass_fraction,
        floor_warning: floor_mass_fraction > 0.01,
    }
}

/// Batch weight profile `a_s = γ^{s-1}/√N`, `s = 1..=tau`, with
/// `γ = 1 − 1/N`. Already in descending magnitude.
pub fn batch_weights(n: f64, tau: usize) -> Result<Vec<f64>> {
    if !(n.is_finite() && n > 1.0) {
        return Err(Error::validation("N must be finite and > 1"));
    }
    if tau == 0 {
        return Err(Error::validation("tau must be >= 1"));
    }
    let gamma = 1.0 - 1.0 / n;
    let mut w = Vec::with_capacity(tau);
    let mut c = 1.0 / n.sqrt();
    for _ in 0..tau {
        w.push(c);
        c *= gamma;
    }
    Ok(w)
}

/// For each `τ` in `tau_list`, builds the density of the batch-weighted sum
/// at size `N`, measures `Var`, `I`, and `δ = I·Var − 1`, and fits the
/// log–log slope of `δ` against `τ` over the strictly positive `δ`.
/// `τ` values are processed in parallel.
pub fn clt_rate_experiment(
    model: &NoiseModel,
    n: f64,
    tau_list: &[usize],
    spec: GridSpec,
) -> Result<CltReport> {
    if tau_list.is_empty() {
        return Err(Error::validation("tau_list must be nonempty"));
    }
    if tau_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("tau_list must be strictly increasing"));
    }
    if tau_list.iter().any(|&t| t as f64 > n) {
        return Err(Error::validation("every tau must be <= N"));
    }
    let reports = tau_list
        .par_iter()
        .map(|&tau| {
            let w = batch_weights(n, tau)?;
            let grid = density_of_weighted_sum(model, &w, spec)?;
            let variance = grid.variance();
            let fisher = fisher_of_grid(&grid);
            Ok(InfoReport {
                tau,
                variance,
                fisher,
                product_minus_one: fisher * variance - 1.0,
            })
        })
        .collect::<Result<Vec<InfoReport>>>()?;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in &reports {
        if r.product_minus_one > 0.0 {
            xs.push((r.tau as f64).ln());
            ys.push(r.product_minus_one.ln());
        }
    }
    let slope_fit = if xs.len() >= 2 {
        crate::crlb::least_squares_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    Ok(CltReport { reports, slope_fit })
}
