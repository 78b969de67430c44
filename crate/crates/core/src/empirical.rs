//! Discrete Slobodeckij seminorms of sampled paths and Monte Carlo gates.
//!
//! A path on the uniform grid is read as piecewise constant: value `v_i` on the
//! cell of width Δ centred at `t_i`. Its seminorm is then the quadratic form
//!
//! ```text
//! Σ_{i≠j} w_{|i−j|} ‖v_i − v_j‖²_{D(A^θ)},   w_m = ∫_{cell 0} ∫_{cell m} |t − s|^{−1−2α} dt ds,
//! ```
//!
//! with `w_m` in closed form. Equivalently `w_m = Δ∫ Λ_m(τ)|τ|^{−1−2α} dτ` for
//! the hat function `Λ_m` centred at `mΔ`; since hats interpolate `|τ|` exactly,
//! the scheme is exact for structure functions linear in the lag, which is the
//! short-lag behaviour of the solution.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::param;
use crate::moments::increment_kernel;
use crate::quadrature::gauss_legendre;
use crate::sampler::{PathEnsemble, TimeGrid};
use crate::spectral::{SpectralOperator, SpectralVector};
use crate::sum::{compensated_sum, NeumaierSum};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum KernelScheme {
    /// Exact cell-pair integrals of the kernel.
    CellExact,
    /// Midpoint kernel values `Δ²|t_i − t_j|^{−1−2α}`, diagonal dropped.
    DiagonalExcluded,
}

/// Lag weights `w_m`, `m = 0..=n` (`w_0 = 0`), for one grid and one α.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    pub alpha: f64,
    pub grid: TimeGrid,
    pub scheme: KernelScheme,
    lag: Vec<f64>,
}

// Below this lag the closed form is used; above it the hat integral is smooth
// enough for one Gauss–Legendre panel per side and avoids the cancellation in
// the second difference.
const CLOSED_FORM_LAGS: usize = 32;

fn unit_cell_weight(m: usize, alpha: f64) -> f64 {
    let e = 1.0 - 2.0 * alpha;
    if m < CLOSED_FORM_LAGS {
        let antider = |x: f64| -libm::pow(x, e) / (e * 2.0 * alpha);
        let mf = m as f64;
        antider(mf + 1.0) - 2.0 * antider(mf) + antider(mf - 1.0)
    } else {
        let mf = m as f64;
        let kernel = |t: f64| libm::pow(t, -1.0 - 2.0 * alpha);
        gauss_legendre(|t| (t - mf + 1.0) * kernel(t), mf - 1.0, mf, 1)
            + gauss_legendre(|t| (mf + 1.0 - t) * kernel(t), mf, mf + 1.0, 1)
    }
}

impl KernelWeights {
    pub fn new(grid: TimeGrid, alpha: f64, scheme: KernelScheme) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(param("alpha", alpha, "the discrete seminorm needs α in (0, 1/2)"));
        }
        let scale = libm::pow(grid.step(), 1.0 - 2.0 * alpha);
        let lag = (0..=grid.steps())
            .map(|m| match (m, scheme) {
                (0, _) => 0.0,
                (m, KernelScheme::CellExact) => scale * unit_cell_weight(m, alpha),
                (m, KernelScheme::DiagonalExcluded) => scale * libm::pow(m as f64, -1.0 - 2.0 * alpha),
            })
            .collect();
        Ok(Self {
            alpha,
            grid,
            scheme,
            lag,
        })
    }

    /// `w_m` for `m = 0..=n`.
    pub fn lags(&self) -> &[f64] {
        &self.lag
    }
}

/// Autocorrelation `out[m] = Σ_i s_i s_{i+m}` for `m = 0..len`.
pub trait Autocorrelation {
    fn autocorrelate(&mut self, series: &[f64], out: &mut [f64]);
}

/// Quadratic-cost reference implementation.
#[derive(Debug, Default, Clone, Copy)]
pub struct DirectAutocorrelation;

impl Autocorrelation for DirectAutocorrelation {
    fn autocorrelate(&mut self, series: &[f64], out: &mut [f64]) {
        let n = series.len();
        for m in 0..n {
            out[m] = series[..n - m].iter().zip(&series[m..]).map(|(a, b)| a * b).sum();
        }
    }
}

fn space_weights(a: &SpectralOperator, theta: f64) -> Vec<f64> {
    a.eigenvalues().iter().map(|&l| libm::pow(l, 2.0 * theta)).collect()
}

fn check_path(path: &[f64], grid: &TimeGrid, modes: usize) {
    assert_eq!(path.len(), grid.points() * modes, "path length does not match grid and modes");
}

/// `S_m = Σ_{i=0}^{n−m} ‖v_{i+m} − v_i‖²_{D(A^θ)}` by direct differencing.
pub fn lag_sums(path: &[f64], a: &SpectralOperator, theta: f64, grid: &TimeGrid) -> Vec<f64> {
    let n_modes = a.truncation();
    check_path(path, grid, n_modes);
    let w = space_weights(a, theta);
    let points = grid.points();
    (0..points)
        .map(|m| {
            let mut acc = 0.0;
            for i in 0..points - m {
                let (lo, hi) = (&path[i * n_modes..(i + 1) * n_modes], &path[(i + m) * n_modes..(i + m + 1) * n_modes]);
                for k in 0..n_modes {
                    let d = hi[k] - lo[k];
                    acc += w[k] * d * d;
                }
            }
            acc
        })
        .collect()
}

/// `S_m` through autocorrelations: `S_m = Σ_k λ_k^{2θ}[Σ_{i≤n−m} (v_{i+m,k}² + v_{i,k}²) − 2R_k(m)]`.
pub fn lag_sums_with<C: Autocorrelation + ?Sized>(
    path: &[f64],
    a: &SpectralOperator,
    theta: f64,
    grid: &TimeGrid,
    correlator: &mut C,
) -> Vec<f64> {
    let n_modes = a.truncation();
    check_path(path, grid, n_modes);
    let w = space_weights(a, theta);
    let points = grid.points();
    let mut sums = vec![0.0; points];
    let mut series = vec![0.0; points];
    let mut corr = vec![0.0; points];
    let mut prefix = vec![0.0; points + 1];
    for k in 0..n_modes {
        for (i, s) in series.iter_mut().enumerate() {
            *s = path[i * n_modes + k];
        }
        if series.iter().all(|&v| v == 0.0) {
            continue;
        }
        for i in 0..points {
            prefix[i + 1] = prefix[i] + series[i] * series[i];
        }
        correlator.autocorrelate(&series, &mut corr);
        for m in 0..points {
            let squares = prefix[points - m] + (prefix[points] - prefix[m]);
            sums[m] += w[k] * (squares - 2.0 * corr[m]);
        }
    }
    sums
}

/// `Σ_{m≥1} 2 w_m S_m`.
pub fn seminorm_from_lag_sums(weights: &KernelWeights, sums: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for (w, s) in weights.lags().iter().zip(sums).skip(1) {
        acc.add(2.0 * w * s);
    }
    acc.total().max(0.0)
}

/// Discrete `[v]²_{W^{α,2}(0,T;D(A^θ))}` of one path (time-major, mode-minor).
pub fn discrete_seminorm(path: &[f64], weights: &KernelWeights, a: &SpectralOperator, theta: f64) -> f64 {
    seminorm_from_lag_sums(weights, &lag_sums(path, a, theta, &weights.grid))
}

/// Trapezoidal `∫_0^T ‖v(t)‖²_{D(A^θ)} dt` of one path.
pub fn discrete_l2(path: &[f64], grid: &TimeGrid, a: &SpectralOperator, theta: f64) -> f64 {
    let n_modes = a.truncation();
    check_path(path, grid, n_modes);
    let w = space_weights(a, theta);
    let mut acc = NeumaierSum::new();
    for (i, v) in path.chunks_exact(n_modes).enumerate() {
        let sq: f64 = v.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let end = i == 0 || i == grid.steps();
        acc.add(if end { 0.5 * sq } else { sq });
    }
    grid.step() * acc.total()
}

/// Monte Carlo mean of a per-path functional with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct SeminormEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub alpha: f64,
    pub theta: f64,
    /// `None` for L² estimates.
    pub kernel_scheme: Option<KernelScheme>,
}

/// Mean and standard error of per-path values, reduced in path order.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / m;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, libm::sqrt(ss / (m - 1.0) / m))
}

/// Builds an estimate from per-path seminorm values.
pub fn estimate(values: &[f64], alpha: f64, theta: f64, scheme: Option<KernelScheme>) -> SeminormEstimate {
    let (mean, std_error) = mean_and_std_error(values);
    SeminormEstimate {
        mean: mean.max(0.0),
        std_error,
        n_paths: values.len(),
        alpha,
        theta,
        kernel_scheme: scheme,
    }
}

/// Monte Carlo estimate of `E[u]²_{W^{α,2}(0,T;D(A^θ))}` with the cell-exact kernel.
pub fn mc_seminorm(ensemble: &PathEnsemble, alpha: f64, a: &SpectralOperator, theta: f64) -> Result<SeminormEstimate> {
    let weights = KernelWeights::new(ensemble.grid, alpha, KernelScheme::CellExact)?;
    mc_seminorm_with(ensemble, &weights, a, theta, &mut DirectAutocorrelation)
}

/// [`mc_seminorm`] with explicit weights and autocorrelation backend.
pub fn mc_seminorm_with<C: Autocorrelation + ?Sized>(
    ensemble: &PathEnsemble,
    weights: &KernelWeights,
    a: &SpectralOperator,
    theta: f64,
    correlator: &mut C,
) -> Result<SeminormEstimate> {
    check_ensemble(ensemble, a)?;
    let values: Vec<f64> = ensemble
        .paths()
        .map(|p| seminorm_from_lag_sums(weights, &lag_sums_with(p, a, theta, &ensemble.grid, correlator)))
        .collect();
    Ok(estimate(&values, weights.alpha, theta, Some(weights.scheme)))
}

/// Monte Carlo estimate of `E‖u‖²_{L²(0,T;D(A^θ))}`.
pub fn mc_l2(ensemble: &PathEnsemble, a: &SpectralOperator, theta: f64) -> Result<SeminormEstimate> {
    check_ensemble(ensemble, a)?;
    let values: Vec<f64> = ensemble.paths().map(|p| discrete_l2(p, &ensemble.grid, a, theta)).collect();
    Ok(estimate(&values, 0.0, theta, None))
}

fn check_ensemble(ensemble: &PathEnsemble, a: &SpectralOperator) -> Result<()> {
    if ensemble.modes != a.truncation() {
        return Err(crate::Error::LengthMismatch {
            operator: a.truncation(),
            vector: ensemble.modes,
        });
    }
    Ok(())
}

/// Exact expectation of [`discrete_seminorm`] over the law of the solution.
pub fn expected_discrete_seminorm(
    a: &SpectralOperator,
    x: &SpectralVector,
    weights: &KernelWeights,
    theta: f64,
) -> Result<f64> {
    a.check(x)?;
    let grid = weights.grid;
    let dt = grid.step();
    let modes: Vec<(f64, f64)> = a
        .eigenvalues()
        .iter()
        .zip(x.coefficients())
        .filter(|(_, &c)| c != 0.0)
        .map(|(&l, &c)| (l, libm::pow(l, 2.0 * theta - 1.0) * c * c))
        .collect();
    let mut acc = NeumaierSum::new();
    for m in 1..=grid.steps() {
        let tau = m as f64 * dt;
        let mut s = 0.0;
        for i in 0..=grid.steps() - m {
            let start = i as f64 * dt;
            for &(l, w) in &modes {
                s += w * increment_kernel(l, start, tau);
            }
        }
        acc.add(2.0 * weights.lags()[m] * s);
    }
    Ok(acc.total())
}

/// Exact expectation of [`discrete_l2`].
pub fn expected_discrete_l2(a: &SpectralOperator, x: &SpectralVector, grid: &TimeGrid, theta: f64) -> Result<f64> {
    a.check(x)?;
    let mut acc = NeumaierSum::new();
    for i in 0..=grid.steps() {
        let t = grid.point(i);
        let v: f64 = a
            .eigenvalues()
            .iter()
            .zip(x.coefficients())
            .map(|(&l, &c)| libm::pow(l, 2.0 * theta) * c * c * t * crate::moments::phi(2.0 * l * t))
            .sum();
        acc.add(if i == 0 || i == grid.steps() { 0.5 * v } else { v });
    }
    Ok(grid.step() * acc.total())
}

/// Richardson estimate of the relative discretization bias of the coarse
/// level, from expectations on a grid and its refinement, assuming order `p`:
/// `2^p |coarse − fine| / ((2^p − 1)|fine|)`.
pub fn richardson_bias(coarse: f64, fine: f64, order: f64) -> f64 {
    if fine == 0.0 {
        return 0.0;
    }
    let r = libm::pow(2.0, order);
    r * libm::fabs(coarse - fine) / ((r - 1.0) * libm::fabs(fine))
}

/// Relative bias of the seminorm estimator on `grid`, measured by grid
/// doubling. The order is observed from the halved, given and doubled grids
/// and clamped to `[1/2, 1]`, so a pre-asymptotic rate never shrinks the bias.
pub fn seminorm_grid_bias(
    a: &SpectralOperator,
    x: &SpectralVector,
    grid: TimeGrid,
    alpha: f64,
    theta: f64,
    scheme: KernelScheme,
) -> Result<f64> {
    let level = |g: TimeGrid| -> Result<f64> { expected_discrete_seminorm(a, x, &KernelWeights::new(g, alpha, scheme)?, theta) };
    let coarse = level(grid)?;
    let fine = level(grid.refined())?;
    let mut order = 1.0;
    if grid.steps().is_multiple_of(2) && grid.steps() >= 4 {
        let halved = level(TimeGrid::new(grid.horizon(), grid.steps() / 2)?)?;
        let (d0, d1) = (libm::fabs(halved - coarse), libm::fabs(coarse - fine));
        if d0 > 0.0 && d1 > 0.0 {
            order = libm::log2(d0 / d1).clamp(0.5, 1.0);
        }
    }
    Ok(richardson_bias(coarse, fine, order))
}

/// Relative bias of the trapezoidal L² estimator on `grid` (order 2).
pub fn l2_grid_bias(a: &SpectralOperator, x: &SpectralVector, grid: TimeGrid, theta: f64) -> Result<f64> {
    let coarse = expected_discrete_l2(a, x, &grid, theta)?;
    let fine = expected_discrete_l2(a, x, &grid.refined(), theta)?;
    Ok(richardson_bias(coarse, fine, 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct GateOutcome {
    pub pass: bool,
    /// `|mean − oracle|`.
    pub deviation: f64,
    /// `kσ·SE + bias·oracle`.
    pub allowance: f64,
    /// `allowance − deviation`; negative on failure.
    pub margin: f64,
    pub k_sigma: f64,
    pub bias: f64,
    pub oracle: f64,
}

/// Passes iff `|mean − oracle| ≤ kσ·SE + bias·oracle`.
pub fn oracle_gate(est: &SeminormEstimate, oracle: f64, k_sigma: f64, bias: f64) -> Result<GateOutcome> {
    if !(k_sigma > 0.0) {
        return Err(param("k_sigma", k_sigma, "must be positive"));
    }
    let deviation = libm::fabs(est.mean - oracle);
    let allowance = k_sigma * est.std_error + bias * libm::fabs(oracle);
    Ok(GateOutcome {
        pass: deviation <= allowance,
        deviation,
        allowance,
        margin: allowance - deviation,
        k_sigma,
        bias,
        oracle,
    })
}
