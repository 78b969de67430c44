//! Diagonal model of a positive, invertible, self-adjoint operator.
//!
//! `A` is represented by a finite nondecreasing eigenvalue sequence; vectors by
//! their coefficients in the eigenbasis. The truncation `N` is always explicit.

use alloc::vec::Vec;

use crate::error::param;
use crate::sum::compensated_sum;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpectralOperator {
    eigenvalues: Vec<f64>,
}

impl SpectralOperator {
    /// Builds the operator from positive eigenvalues in any order; they are
    /// stored ascending.
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if let Some((index, &value)) = eigenvalues
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidEigenvalue { index, value });
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of modes kept.
    pub fn truncation(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Spectral gap δ = λ_min, so that ‖e^{-tA}‖ ≤ e^{-δt}.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// The first `n` modes.
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.clamp(1, self.eigenvalues.len());
        Self {
            eigenvalues: self.eigenvalues[..n].to_vec(),
        }
    }

    pub(crate) fn check(&self, x: &SpectralVector) -> Result<()> {
        if self.truncation() != x.len() {
            return Err(Error::LengthMismatch {
                operator: self.truncation(),
                vector: x.len(),
            });
        }
        Ok(())
    }

    /// `‖A^α x‖ = (Σ λ_k^{2α} x_k²)^{1/2}`, the homogeneous norm of `D(A^α)`.
    pub fn fractional_norm(&self, x: &SpectralVector, alpha: f64) -> Result<f64> {
        self.check(x)?;
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(param("alpha", alpha, "must be finite and nonnegative"));
        }
        Ok(libm::sqrt(self.power_weighted_square(x, alpha)))
    }

    /// `Σ λ_k^{2α} x_k²` in ascending mode order.
    pub(crate) fn power_weighted_square(&self, x: &SpectralVector, alpha: f64) -> f64 {
        compensated_sum(
            self.eigenvalues
                .iter()
                .zip(x.coefficients())
                .map(|(&l, &c)| libm::pow(l, 2.0 * alpha) * c * c),
        )
    }

    /// `e^{-tA} x`; exactly `x` at `t = 0`.
    pub fn semigroup_apply(&self, t: f64, x: &SpectralVector) -> Result<SpectralVector> {
        self.check(x)?;
        if !(t >= 0.0) {
            return Err(param("t", t, "time must be nonnegative"));
        }
        if t == 0.0 {
            return Ok(x.clone());
        }
        Ok(SpectralVector {
            coefficients: self
                .eigenvalues
                .iter()
                .zip(x.coefficients())
                .map(|(&l, &c)| c * libm::exp(-l * t))
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpectralVector {
    coefficients: Vec<f64>,
}

impl SpectralVector {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if let Some(index) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoefficient { index });
        }
        Ok(Self { coefficients })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coefficients: alloc::vec![0.0; n],
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    /// Euclidean norm of the coefficients.
    pub fn norm(&self) -> f64 {
        libm::sqrt(compensated_sum(self.coefficients.iter().map(|c| c * c)))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn truncate(&self, n: usize) -> Self {
        Self {
            coefficients: self.coefficients[..n.min(self.len())].to_vec(),
        }
    }
}

/// Test family `λ_k = a·k^γ`, `x_k = c·k^{-β}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerFamily {
    pub amplitude: f64,
    pub coefficient_exponent: f64,
    pub eigenvalue_exponent: f64,
    pub eigenvalue_scale: f64,
}

/// Membership of a power family in `D(A^α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Membership {
    Member,
    /// Partial sums of `Σ λ_k^{2α} x_k²` grow like `N^{growth_exponent}`
    /// (logarithmically when the exponent is zero).
    Nonmember { growth_exponent: f64 },
}

impl PowerFamily {
    pub fn new(amplitude: f64, coefficient_exponent: f64, eigenvalue_exponent: f64, eigenvalue_scale: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(param("amplitude", amplitude, "must be positive"));
        }
        if !(coefficient_exponent >= 0.0 && coefficient_exponent.is_finite()) {
            return Err(param("coefficient_exponent", coefficient_exponent, "must be nonnegative"));
        }
        if !(eigenvalue_exponent > 0.0 && eigenvalue_exponent.is_finite()) {
            return Err(param("eigenvalue_exponent", eigenvalue_exponent, "must be positive"));
        }
        if !(eigenvalue_scale > 0.0 && eigenvalue_scale.is_finite()) {
            return Err(param("eigenvalue_scale", eigenvalue_scale, "must be positive"));
        }
        Ok(Self {
            amplitude,
            coefficient_exponent,
            eigenvalue_exponent,
            eigenvalue_scale,
        })
    }

    pub fn operator(&self, modes: usize) -> Result<SpectralOperator> {
        SpectralOperator::new(
            (1..=modes)
                .map(|k| self.eigenvalue_scale * libm::pow(k as f64, self.eigenvalue_exponent))
                .collect(),
        )
    }

    pub fn vector(&self, modes: usize) -> SpectralVector {
        SpectralVector {
            coefficients: (1..=modes)
                .map(|k| self.amplitude * libm::pow(k as f64, -self.coefficient_exponent))
                .collect(),
        }
    }

    /// `Σ a^{2α} c² k^{2αγ−2β}` converges iff `2αγ − 2β < −1`.
    pub fn classify(&self, alpha: f64) -> Result<Membership> {
        if !(0.0..0.5).contains(&alpha) {
            return Err(param("alpha", alpha, "must lie in [0, 1/2)"));
        }
        let exponent = 2.0 * alpha * self.eigenvalue_exponent - 2.0 * self.coefficient_exponent;
        Ok(if exponent < -1.0 {
            Membership::Member
        } else {
            Membership::Nonmember {
                growth_exponent: exponent + 1.0,
            }
        })
    }
}
