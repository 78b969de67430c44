//! Dirichlet Laplacian on an interval `(0, L)`.
//!
//! Eigenpairs are `λ_k = (kπ/L)²`, `e_k = √(2/L) sin(kπs/L)`. Boundary data `h`
//! enters through its sine coefficients; a nonzero trace (e.g. `h ≡ 1`) gives
//! `x_k ~ k^{-1}`, so `x ∈ D(A^α)` exactly for `α < 1/4`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::param;
use crate::moments::{seminorm_terms, RegularityQuery};
use crate::spectral::{SpectralOperator, SpectralVector};
use crate::sweep::{verdict, TruncationSweep, Verdict};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntervalDomain {
    length: f64,
}

impl IntervalDomain {
    pub fn new(length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(param("length", length, "interval length must be positive and finite"));
        }
        Ok(Self { length })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

/// `(kπ/L)²` for `k = 1..=modes`.
pub fn dirichlet_operator(domain: IntervalDomain, modes: usize) -> Result<SpectralOperator> {
    if modes == 0 {
        return Err(Error::EmptySpectrum);
    }
    let f = PI / domain.length;
    SpectralOperator::new((1..=modes).map(|k| (k as f64 * f) * (k as f64 * f)).collect())
}

/// Samples of `h` at `m + 1` uniform points `s_i = iL/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: IntervalDomain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: IntervalDomain, values: Vec<f64>) -> Result<Self> {
        let m = values.len().saturating_sub(1);
        if m < 8 {
            return Err(Error::Grid("a grid function needs at least 9 samples"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoefficient { index: i });
        }
        Ok(Self { domain, values })
    }

    /// Samples `f` on `m` intervals.
    pub fn sample<F: Fn(f64) -> f64>(domain: IntervalDomain, intervals: usize, f: F) -> Result<Self> {
        let h = domain.length / intervals as f64;
        Self::new(domain, (0..=intervals).map(|i| f(i as f64 * h)).collect())
    }

    /// From `(position, value)` pairs; positions must start at 0 and be uniform
    /// to relative `1e-9` of the spacing. The domain length is the last position.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() < 9 {
            return Err(Error::Grid("a grid function needs at least 9 samples"));
        }
        let length = pairs[pairs.len() - 1].0;
        let domain = IntervalDomain::new(length)?;
        let h = length / (pairs.len() - 1) as f64;
        for (i, &(s, _)) in pairs.iter().enumerate() {
            if libm::fabs(s - i as f64 * h) > 1e-9 * h {
                return Err(Error::Grid("sample positions must be uniform and start at 0"));
            }
        }
        Self::new(domain, pairs.iter().map(|p| p.1).collect())
    }

    pub fn domain(&self) -> IntervalDomain {
        self.domain
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Composite Simpson (trapezoid on the last interval when `m` is odd) for `‖h‖²_{L²}`.
    pub fn l2_norm_squared(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        simpson(&sq, self.domain.length / self.intervals() as f64)
    }
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let m = f.len() - 1;
    let even = m - m % 2;
    let mut acc = f[0] + f[even];
    for (i, v) in f.iter().enumerate().take(even).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = acc * h / 3.0;
    if even < m {
        total += 0.5 * h * (f[m - 1] + f[m]);
    }
    total
}

/// `x_k = ∫_0^L h(s) √(2/L) sin(kπs/L) ds`, `k = 1..=modes`, by composite Simpson.
pub fn sine_coefficients(h: &GridFunction, modes: usize) -> Result<SpectralVector> {
    let m = h.intervals();
    if modes == 0 || 2 * modes > m {
        return Err(Error::Resolution {
            modes,
            required: 2 * modes.max(1),
            intervals: m,
        });
    }
    let l = h.domain.length;
    let step = l / m as f64;
    let norm = libm::sqrt(2.0 / l);
    let mut buf = alloc::vec![0.0; m + 1];
    let coefficients = (1..=modes)
        .map(|k| {
            for (i, (b, v)) in buf.iter_mut().zip(&h.values).enumerate() {
                // reduce kπi/m modulo 2π in integers for accuracy at high k
                let phase = ((k * i) % (2 * m)) as f64 * PI / m as f64;
                *b = v * libm::sin(phase);
            }
            norm * simpson(&buf, step)
        })
        .collect();
    SpectralVector::new(coefficients)
}

/// Boundary data with closed-form sine coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Profile {
    /// `h ≡ 1`.
    One,
    /// `h(s) = sin(πs/L)`.
    Sine,
    /// `h(s) = 1 − |2s/L − 1|`.
    Hat,
}

impl Profile {
    pub fn evaluate(&self, domain: IntervalDomain, s: f64) -> f64 {
        let l = domain.length;
        match self {
            Profile::One => 1.0,
            Profile::Sine => libm::sin(PI * s / l),
            Profile::Hat => 1.0 - libm::fabs(2.0 * s / l - 1.0),
        }
    }

    pub fn sample(&self, domain: IntervalDomain, intervals: usize) -> Result<GridFunction> {
        GridFunction::sample(domain, intervals, |s| self.evaluate(domain, s))
    }

    /// Exact coefficients `x_1..x_modes`.
    pub fn coefficients(&self, domain: IntervalDomain, modes: usize) -> Result<SpectralVector> {
        let l = domain.length;
        let coefficients = (1..=modes)
            .map(|k| {
                let kf = k as f64;
                match self {
                    Profile::One if k % 2 == 1 => 2.0 * libm::sqrt(2.0 * l) / (kf * PI),
                    Profile::One => 0.0,
                    Profile::Sine if k == 1 => libm::sqrt(l / 2.0),
                    Profile::Sine => 0.0,
                    Profile::Hat => {
                        let sign = match k % 4 {
                            1 => 1.0,
                            3 => -1.0,
                            _ => 0.0,
                        };
                        libm::sqrt(2.0 / l) * 4.0 * l * sign / (kf * kf * PI * PI)
                    }
                }
            })
            .collect();
        SpectralVector::new(coefficients)
    }
}

/// Verdict for one α of a threshold scan.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct ThresholdRow {
    pub alpha: f64,
    pub sweep: TruncationSweep,
    pub verdict: Verdict,
}

/// Seminorm moment sweeps of `h`'s coefficients `x` over `truncations`, one
/// verdict per α. `x` must hold at least the largest truncation.
pub fn threshold_scan(
    x: &SpectralVector,
    domain: IntervalDomain,
    alphas: &[f64],
    horizon: f64,
    truncations: &[usize],
    tol: f64,
    quad_tol: f64,
) -> Result<Vec<ThresholdRow>> {
    let top = *truncations.last().ok_or(Error::Grid("empty truncation list"))?;
    if x.len() < top {
        return Err(Error::LengthMismatch {
            operator: top,
            vector: x.len(),
        });
    }
    let a = dirichlet_operator(domain, top)?;
    let x = x.truncate(top);
    alphas
        .iter()
        .map(|&alpha| {
            let q = RegularityQuery::theorem(alpha, horizon)?;
            let terms = seminorm_terms(&a, &x, &q, quad_tol)?;
            let sweep = TruncationSweep::from_terms(&terms, truncations)?;
            let verdict = verdict(&sweep, tol);
            Ok(ThresholdRow { alpha, sweep, verdict })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> IntervalDomain {
        IntervalDomain::new(1.0).unwrap()
    }

    #[test]
    fn eigenvalues_and_scaling() {
        let a = dirichlet_operator(unit(), 3).unwrap();
        let pi2 = PI * PI;
        for (l, k) in a.eigenvalues().iter().zip([1.0, 4.0, 9.0]) {
            assert!((l - k * pi2).abs() < 1e-12 * l);
        }
        assert_eq!(a.gap(), a.eigenvalues()[0]);
        let b = dirichlet_operator(IntervalDomain::new(2.0).unwrap(), 1).unwrap();
        assert!((b.eigenvalues()[0] - pi2 / 4.0).abs() < 1e-14);
        assert!(dirichlet_operator(unit(), 0).is_err());
        assert!(IntervalDomain::new(0.0).is_err());
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let d = unit();
        for p in [Profile::One, Profile::Sine, Profile::Hat] {
            let q = sine_coefficients(&p.sample(d, 1 << 14).unwrap(), 1 << 7).unwrap();
            let e = p.coefficients(d, 1 << 7).unwrap();
            for (a, b) in q.coefficients().iter().zip(e.coefficients()) {
                assert!((a - b).abs() < 1e-6, "{p:?}: {a} vs {b}");
            }
        }
        let x = Profile::Sine.coefficients(d, 4).unwrap();
        assert!((x.coefficients()[0] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_data_and_resolution_guard() {
        let h = GridFunction::sample(unit(), 16, |_| 0.0).unwrap();
        assert!(sine_coefficients(&h, 8).unwrap().is_zero());
        assert!(matches!(sine_coefficients(&h, 9), Err(Error::Resolution { .. })));
        assert!(GridFunction::sample(unit(), 7, |_| 1.0).is_err());
    }

    #[test]
    fn parseval_for_constant() {
        let x = Profile::One.coefficients(unit(), 1 << 14).unwrap();
        let s: f64 = x.coefficients().iter().map(|c| c * c).sum();
        assert!(s < 1.0 && 1.0 - s < 1e-4, "{s}");
        let h = Profile::One.sample(unit(), 64).unwrap();
        assert!((h.l2_norm_squared() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pairs_must_be_uniform() {
        let pairs: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64 * 0.2, 1.0)).collect();
        let h = GridFunction::from_pairs(&pairs).unwrap();
        assert_eq!(h.domain().length(), 2.0);
        let mut bad = pairs.clone();
        bad[3].0 += 0.01;
        assert!(GridFunction::from_pairs(&bad).is_err());
    }

    #[test]
    fn single_mode_profile_is_stable() {
        let x = Profile::Sine.coefficients(unit(), 64).unwrap();
        let rows = threshold_scan(&x, unit(), &[0.1, 0.45], 1.0, &[16, 32, 64], 1e-3, 1e-10).unwrap();
        for r in rows {
            assert!(matches!(r.verdict, Verdict::FiniteStable { .. }));
        }
    }
}
