//! Exact sampling of `u(t) = ∫_0^t e^{-(t-r)A} x dβ(r)` on a uniform grid.
//!
//! Over one step of length Δ every mode evolves as
//!
//! ```text
//! u_k(t_{i+1}) = e^{−λ_k Δ} u_k(t_i) + x_k ξ_k,   ξ_k = ∫_{t_i}^{t_{i+1}} e^{−λ_k(t_{i+1}−r)} dβ(r).
//! ```
//!
//! All modes share the same Brownian motion, so `ξ` is a Gaussian vector with
//! covariance `C_{kj} = (1 − e^{−(λ_k+λ_j)Δ})/(λ_k+λ_j)`, independent across
//! steps. One Cholesky factor of `C` serves every step and every path; the law
//! at the grid points is exact, with no time-discretization error.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::param;
use crate::moments::phi;
use crate::rng::fill_standard_normal;
use crate::spectral::{SpectralOperator, SpectralVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(param("horizon", horizon, "must be positive"));
        }
        if steps < 2 {
            return Err(Error::Grid("a time grid needs at least two steps"));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// `t_i = iΔ`, `i = 0..=n`.
    pub fn point(&self, i: usize) -> f64 {
        if i == self.steps {
            self.horizon
        } else {
            i as f64 * self.step()
        }
    }

    /// Number of grid points, `n + 1`.
    pub fn points(&self) -> usize {
        self.steps + 1
    }

    /// The grid with twice as many steps; every point of `self` is a point of
    /// the refinement with index doubled.
    pub fn refined(&self) -> Self {
        Self {
            horizon: self.horizon,
            steps: 2 * self.steps,
        }
    }
}

/// Covariance of the per-step innovations and its Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StepCovariance {
    modes: usize,
    matrix: Vec<f64>,
    factor: Vec<f64>,
    /// Diagonal shift added before factorization, as a multiple of `max diag C`.
    pub jitter: f64,
    /// `max |L Lᵀ − C| / max |C|`.
    pub residual: f64,
}

const MAX_JITTER: f64 = 1e-8;
const FIRST_JITTER: f64 = 1e-14;

impl StepCovariance {
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Row-major `N × N` covariance.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Row-major lower-triangular factor `L` with `L Lᵀ ≈ C`.
    pub fn factor(&self) -> &[f64] {
        &self.factor
    }

    pub fn entry(&self, k: usize, j: usize) -> f64 {
        self.matrix[k * self.modes + j]
    }

    /// `out = L z`.
    pub fn correlate(&self, z: &[f64], out: &mut [f64]) {
        let n = self.modes;
        for k in 0..n {
            let row = &self.factor[k * n..k * n + k + 1];
            out[k] = row.iter().zip(&z[..=k]).map(|(l, z)| l * z).sum();
        }
    }
}

/// Plain Cholesky; returns the smallest pivot on failure.
fn cholesky(matrix: &[f64], n: usize, shift: f64) -> core::result::Result<Vec<f64>, f64> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = matrix[i * n + j];
            if i == j {
                s += shift;
            }
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(s);
                }
                l[i * n + i] = libm::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Covariance of one step's innovations and its factor.
///
/// Factorization is tried without shift, then with `η·max diag C` on the
/// diagonal for `η = 10⁻¹⁴, 2·10⁻¹⁴, …` up to `10⁻⁸`; the shift used is
/// recorded in [`StepCovariance::jitter`].
pub fn step_covariance(a: &SpectralOperator, step: f64) -> Result<StepCovariance> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(param("step", step, "must be positive"));
    }
    let lam = a.eigenvalues();
    let n = lam.len();
    let mut matrix = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            matrix[k * n + j] = step * phi((lam[k] + lam[j]) * step);
        }
    }
    let max_diag = (0..n).map(|k| matrix[k * n + k]).fold(0.0, f64::max);
    let mut eta = 0.0;
    let mut min_pivot;
    loop {
        match cholesky(&matrix, n, eta * max_diag) {
            Ok(factor) => {
                let residual = reconstruction_residual(&matrix, &factor, n) / max_diag;
                return Ok(StepCovariance {
                    modes: n,
                    matrix,
                    factor,
                    jitter: eta,
                    residual,
                });
            }
            Err(pivot) => min_pivot = pivot,
        }
        eta = if eta == 0.0 { FIRST_JITTER } else { 2.0 * eta };
        if eta > MAX_JITTER {
            let min_diag = (0..n).map(|k| matrix[k * n + k]).fold(f64::INFINITY, f64::min);
            return Err(Error::Factorization {
                jitter: eta / 2.0,
                min_pivot,
                condition: max_diag / min_diag,
            });
        }
    }
}

fn reconstruction_residual(matrix: &[f64], factor: &[f64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let llt: f64 = (0..=j).map(|k| factor[i * n + k] * factor[j * n + k]).sum();
            worst = worst.max(libm::fabs(llt - matrix[i * n + j]));
        }
    }
    worst
}

/// `Cov(u_k(s), u_j(t)) = x_k x_j e^{−λ_k(s−m)} e^{−λ_j(t−m)} (1 − e^{−(λ_k+λ_j)m})/(λ_k+λ_j)`,
/// `m = min(s, t)`, as a row-major `N × N` matrix.
pub fn exact_marginal_covariance(a: &SpectralOperator, x: &SpectralVector, s: f64, t: f64) -> Result<Vec<f64>> {
    a.check(x)?;
    if !(s >= 0.0) {
        return Err(param("s", s, "time must be nonnegative"));
    }
    if !(t >= 0.0) {
        return Err(param("t", t, "time must be nonnegative"));
    }
    let m = s.min(t);
    let lam = a.eigenvalues();
    let c = x.coefficients();
    let n = lam.len();
    let mut out = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            let sum = lam[k] + lam[j];
            out[k * n + j] = c[k] * c[j] * libm::exp(-lam[k] * (s - m) - lam[j] * (t - m)) * m * phi(sum * m);
        }
    }
    Ok(out)
}

/// Generates individual paths; shared read-only by any number of workers.
#[derive(Debug, Clone)]
pub struct PathSampler {
    grid: TimeGrid,
    seed: u64,
    coefficients: Vec<f64>,
    decay: Vec<f64>,
    covariance: StepCovariance,
}

impl PathSampler {
    pub fn new(a: &SpectralOperator, x: &SpectralVector, grid: TimeGrid, seed: u64) -> Result<Self> {
        a.check(x)?;
        let step = grid.step();
        Ok(Self {
            grid,
            seed,
            coefficients: x.coefficients().to_vec(),
            decay: a.eigenvalues().iter().map(|&l| libm::exp(-l * step)).collect(),
            covariance: step_covariance(a, step)?,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn modes(&self) -> usize {
        self.coefficients.len()
    }

    pub fn covariance(&self) -> &StepCovariance {
        &self.covariance
    }

    /// Values per path: `(n + 1)·N`.
    pub fn path_len(&self) -> usize {
        self.grid.points() * self.modes()
    }

    /// Writes path `index` (time-major, mode-minor) into `out`.
    pub fn sample_into(&self, index: u64, out: &mut [f64]) {
        let n = self.modes();
        assert_eq!(out.len(), self.path_len(), "output buffer has wrong length");
        let mut z = vec![0.0; n];
        let mut xi = vec![0.0; n];
        out[..n].fill(0.0);
        for i in 0..self.grid.steps() {
            fill_standard_normal(self.seed, index, i as u64, &mut z);
            self.covariance.correlate(&z, &mut xi);
            let (prev, next) = out[i * n..(i + 2) * n].split_at_mut(n);
            for k in 0..n {
                next[k] = self.decay[k] * prev[k] + self.coefficients[k] * xi[k];
            }
        }
    }
}

/// A seeded collection of sampled paths, stored path-major, time-major,
/// mode-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub grid: TimeGrid,
    pub seed: u64,
    pub modes: usize,
    pub n_paths: usize,
    values: Vec<f64>,
}

impl PathEnsemble {
    /// Wraps raw values; `values.len()` must be `n_paths·(n+1)·modes`.
    pub fn from_values(grid: TimeGrid, seed: u64, modes: usize, n_paths: usize, values: Vec<f64>) -> Result<Self> {
        if modes == 0 || n_paths == 0 {
            return Err(Error::Grid("ensembles need at least one mode and one path"));
        }
        if values.len() != n_paths * grid.points() * modes {
            return Err(Error::Grid("value count does not match ensemble shape"));
        }
        Ok(Self {
            grid,
            seed,
            modes,
            n_paths,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn path_len(&self) -> usize {
        self.grid.points() * self.modes
    }

    /// Path `p` as `(n + 1)` consecutive coefficient vectors.
    pub fn path(&self, p: usize) -> &[f64] {
        let len = self.path_len();
        &self.values[p * len..(p + 1) * len]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.path_len())
    }

    pub fn value(&self, path: usize, point: usize, mode: usize) -> f64 {
        self.values[path * self.path_len() + point * self.modes + mode]
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

/// Samples `n_paths` paths sequentially. Path `p` depends only on
/// `(seed, p)`, so any sharding of `0..n_paths` reproduces these values bit for
/// bit.
pub fn sample_paths(
    a: &SpectralOperator,
    x: &SpectralVector,
    grid: TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(param("n_paths", 0.0, "at least one path is required"));
    }
    let sampler = PathSampler::new(a, x, grid, seed)?;
    let len = sampler.path_len();
    let mut values = vec![0.0; n_paths * len];
    for (p, chunk) in values.chunks_exact_mut(len).enumerate() {
        sampler.sample_into(p as u64, chunk);
    }
    PathEnsemble::from_values(grid, seed, a.truncation(), n_paths, values)
}

/// Sample covariance `Cov(u_k(t_i), u_j(t_l))` across the ensemble and the
/// standard error of each entry, both row-major `N × N`.
pub fn empirical_covariance(ensemble: &PathEnsemble, i: usize, l: usize) -> (Vec<f64>, Vec<f64>) {
    let n = ensemble.modes;
    let m = ensemble.n_paths as f64;
    let mut cov = vec![0.0; n * n];
    let mut se = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            let (mut sa, mut sb) = (0.0, 0.0);
            for p in 0..ensemble.n_paths {
                sa += ensemble.value(p, i, k);
                sb += ensemble.value(p, l, j);
            }
            let (ma, mb) = (sa / m, sb / m);
            let (mut s1, mut s2) = (0.0, 0.0);
            for p in 0..ensemble.n_paths {
                let prod = (ensemble.value(p, i, k) - ma) * (ensemble.value(p, l, j) - mb);
                s1 += prod;
                s2 += prod * prod;
            }
            let mean = s1 / m;
            let var = (s2 / m - mean * mean).max(0.0);
            cov[k * n + j] = s1 / (m - 1.0);
            se[k * n + j] = libm::sqrt(var / (m - 1.0));
        }
    }
    (cov, se)
}
