//! Numerical laboratory for temporal regularity of the linear parabolic SPDE
//!
//! ```text
//! du + A u dt = x dβ,   u(0) = 0,
//! ```
//!
//! with `A` positive, invertible and self-adjoint, modeled by its eigenvalues.
//! The solution is the stochastic convolution `u(t) = ∫_0^t e^{-(t-r)A} x dβ(r)`
//! and lies in `W^{α,2}(0,T; D(A^{1/2}))` exactly when `x ∈ D(A^α)`.
//!
//! The crate provides
//!
//! * [`spectral`]: the diagonal operator model, fractional norms and power families,
//! * [`moments`]: closed-form and quadrature second moments of the solution,
//!   Komatsu's constant and the two-sided certificates,
//! * [`sweep`]: truncation sweeps and divergence diagnostics,
//! * [`sampler`]: exact Gaussian sampling of solution paths on uniform grids,
//! * [`empirical`]: discrete Slobodeckij seminorms and Monte Carlo gates,
//! * [`dirichlet`]: the Dirichlet Laplacian on an interval and its boundary threshold.
//!
//! The crate is `no_std` and only needs `alloc`; all transcendental functions come
//! from `libm` so results are bit-reproducible across platforms.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod sum;
pub mod quadrature;
pub mod spectral;
pub mod moments;
pub mod sweep;
pub mod rng;
pub mod sampler;
pub mod empirical;
pub mod dirichlet;

pub use error::{Error, Result};

/// Crate version, recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use spectral::{Membership, PowerFamily, SpectralOperator, SpectralVector};
pub use moments::{CertificateReport, RegularityQuery};
pub use sampler::{PathEnsemble, StepCovariance, TimeGrid};
pub use empirical::{KernelScheme, KernelWeights, SeminormEstimate};
