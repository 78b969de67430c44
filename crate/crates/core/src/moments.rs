//! Deterministic second moments of the stochastic convolution
//! `u(t) = ∫_0^t e^{-(t-r)A} x dβ(r)` and the constants of the two-sided
//! `W^{α,2}(0,T; D(A^{1/2}))` estimate.
//!
//! Everything is evaluated per mode and summed in ascending mode order. For a
//! mode with eigenvalue `λ` and unit coefficient the building blocks are
//!
//! * `M(λ, s, τ) = ½(1−a)²(1−e^{−2λs}) + ½(1−a²)`, `a = e^{−λτ}`: λ times the
//!   variance of `u(s+τ) − u(s)` (both orthogonal Itô integrals kept),
//! * `E(λ, T) = T/2 − (1−e^{−2λT})/(4λ)`: λ times `∫_0^T Var u(t) dt`,
//! * `F(λ, α, T) = 2∫_0^T τ^{−1−2α} G(λ, τ, T) dτ` with `G = ∫_0^{T−τ} M ds`:
//!   λ times the expected squared Slobodeckij seminorm.
//!
//! A mode weighted in `D(A^θ)` contributes `λ^{2θ−1} x_k²` times the block.

use alloc::vec::Vec;

use crate::error::param;
use crate::quadrature::{gauss_kronrod, gauss_legendre, Adaptive};
use crate::spectral::{SpectralOperator, SpectralVector};
use crate::sum::{compensated_sum, NeumaierSum};
use crate::{Error, Result};

/// `(1 − e^{−z})/z`, equal to 1 at `z = 0`.
#[inline]
pub(crate) fn phi(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        -libm::expm1(-z) / z
    }
}

/// `1 − φ(z)` without cancellation for small `z`.
#[inline]
pub(crate) fn one_minus_phi(z: f64) -> f64 {
    if z < 0.5 {
        // Σ_{n≥1} (−1)^{n+1} zⁿ/(n+1)!
        let mut term = z / 2.0;
        let mut acc = term;
        for n in 2..16 {
            term *= -z / (n + 1) as f64;
            acc += term;
        }
        acc
    } else {
        1.0 - phi(z)
    }
}

/// `M(λ, s, τ)`: λ times the variance of a unit-coefficient increment over
/// `[s, s+τ]`.
pub fn increment_kernel(lambda: f64, s: f64, tau: f64) -> f64 {
    let one_minus_a = -libm::expm1(-lambda * tau);
    let one_minus_a2 = -libm::expm1(-2.0 * lambda * tau);
    let warmup = -libm::expm1(-2.0 * lambda * s);
    0.5 * one_minus_a * one_minus_a * warmup + 0.5 * one_minus_a2
}

/// `E(λ, T) = T/2 − (1 − e^{−2λT})/(4λ)`.
pub fn energy_kernel(lambda: f64, horizon: f64) -> f64 {
    0.5 * horizon * one_minus_phi(2.0 * lambda * horizon)
}

/// `G(λ, τ, T)/τ`, the lag-τ structure integral divided by the lag.
fn lag_integral_over_lag(lambda: f64, tau: f64, horizon: f64) -> f64 {
    let rest = (horizon - tau).max(0.0);
    let one_minus_a = -libm::expm1(-lambda * tau);
    // (1 − a)²/τ and (1 − a²)/τ
    let sq_over_tau = lambda * phi(lambda * tau) * one_minus_a;
    let lin_over_tau = 2.0 * lambda * phi(2.0 * lambda * tau);
    // b − (1 − e^{−2λb})/(2λ) = b(1 − φ(2λb))
    let settled = rest * one_minus_phi(2.0 * lambda * rest);
    0.5 * sq_over_tau * settled + 0.5 * lin_over_tau * rest
}

/// `G(λ, τ, T) = ∫_0^{T−τ} M(λ, s, τ) ds`.
pub fn lag_integral(lambda: f64, tau: f64, horizon: f64) -> f64 {
    tau * lag_integral_over_lag(lambda, tau, horizon)
}

fn check_seminorm_args(alpha: f64, horizon: f64, tol: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(param("alpha", alpha, "seminorm moments need α in (0, 1/2)"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(param("horizon", horizon, "must be positive"));
    }
    if !(tol > 0.0) {
        return Err(param("tol", tol, "must be positive"));
    }
    Ok(())
}

/// `F(λ, α, T)` on the graded variable `τ = T w^{1/(1−2α)}`.
///
/// The substitution absorbs the `τ^{−2α}` endpoint singularity: the transformed
/// integrand is `2pT^{1−2α}·G(τ)/τ`, bounded by `2pT^{2−2α}λ`. Adaptive
/// Gauss–Kronrod then resolves the transition layer at `τ ≈ 1/λ`. The layer of
/// width `~1/(2λ)` at `τ → T` is too thin to be seen by the first panels, so
/// for `32/λ < T/2` a breakpoint is placed at `τ = T − 32/λ`, past which the
/// layer has decayed by `e^{−64}`.
pub fn seminorm_factor(lambda: f64, alpha: f64, horizon: f64, tol: f64) -> Result<f64> {
    check_seminorm_args(alpha, horizon, tol)?;
    let grading = 1.0 / (1.0 - 2.0 * alpha);
    let scale = 2.0 * grading * libm::pow(horizon, 1.0 - 2.0 * alpha);
    let integrand = |w: f64| lag_integral_over_lag(lambda, horizon * libm::pow(w, grading), horizon);
    let rule = Adaptive::relative(tol);
    let value = if 32.0 / lambda < 0.5 * horizon {
        let split = libm::pow(1.0 - 32.0 / (lambda * horizon), 1.0 - 2.0 * alpha);
        let bulk = gauss_kronrod(integrand, 0.0, split, &rule)?.value;
        // the end piece is O(λ^{−2}) of the bulk; judge it against the bulk
        let end = Adaptive {
            abs_tol: 0.5 * tol * bulk,
            ..rule
        };
        bulk + gauss_kronrod(integrand, split, 1.0, &end)?.value
    } else {
        gauss_kronrod(integrand, 0.0, 1.0, &rule)?.value
    };
    Ok(scale * value)
}

/// `F(λ, α, T)` on logarithmic variables, as an independent check of
/// [`seminorm_factor`].
///
/// Lags in `[τ₀, T/2]` use `τ = e^u` and lags in `[T/2, T − τ₀]` use
/// `T − τ = e^v`, so the layers of width `~1/λ` at both ends are graded.
/// Below `τ₀ = 10⁻⁵·min(T, 1/λ)` the second-order expansion
/// `G ≈ λTτ + (½λ²E₂ − λ²T − λ)τ²`, `E₂ = T(1 − φ(2λT))`, is integrated
/// exactly; the last `τ₀` before `T`, where the integrand vanishes linearly,
/// takes one trapezoid. Both pieces use composite Gauss–Legendre with panel
/// doubling.
pub fn seminorm_factor_log(lambda: f64, alpha: f64, horizon: f64, tol: f64) -> Result<f64> {
    check_seminorm_args(alpha, horizon, tol)?;
    let tau0 = 1e-5 * horizon.min(1.0 / lambda);
    let settled = horizon * one_minus_phi(2.0 * lambda * horizon);
    let g1 = lambda * horizon;
    let g2 = 0.5 * lambda * lambda * settled - lambda * lambda * horizon - lambda;
    let e = 1.0 - 2.0 * alpha;
    let head = 2.0 * (g1 * libm::pow(tau0, e) / e + g2 * libm::pow(tau0, e + 1.0) / (e + 1.0));
    let kernel = |tau: f64| 2.0 * libm::pow(tau, -2.0 * alpha) * lag_integral_over_lag(lambda, tau, horizon);
    let last = 0.5 * tau0 * kernel(horizon - tau0);

    let lower = |u: f64| {
        let tau = libm::exp(u);
        tau * kernel(tau)
    };
    let upper = |v: f64| {
        let r = libm::exp(v);
        r * kernel(horizon - r)
    };
    let (a, b) = (libm::log(tau0), libm::log(0.5 * horizon));
    let both = |panels: usize| gauss_legendre(lower, a, b, panels) + gauss_legendre(upper, a, b, panels);
    let mut panels = 16;
    let mut previous = both(panels);
    loop {
        panels *= 2;
        let current = both(panels);
        let change = libm::fabs(current - previous);
        if change <= tol * libm::fabs(current) {
            return Ok(head + current + last);
        }
        if panels >= 1 << 15 {
            return Err(Error::QuadratureNotConverged {
                tol,
                estimate: change / libm::fabs(current),
            });
        }
        previous = current;
    }
}

/// Which norm `E‖u‖²_{W^{α,2}(0,T; D(A^θ))}` is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularityQuery {
    pub alpha: f64,
    pub horizon: f64,
    pub space_exponent: f64,
}

impl RegularityQuery {
    pub fn new(alpha: f64, horizon: f64, space_exponent: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&alpha) {
            return Err(param("alpha", alpha, "must lie in [0, 1/2)"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(param("horizon", horizon, "must be positive"));
        }
        if !space_exponent.is_finite() {
            return Err(param("space_exponent", space_exponent, "must be finite"));
        }
        Ok(Self {
            alpha,
            horizon,
            space_exponent,
        })
    }

    /// Spatial norm `D(A^{1/2})`.
    pub fn theorem(alpha: f64, horizon: f64) -> Result<Self> {
        Self::new(alpha, horizon, 0.5)
    }

    /// Mixed scale `D(A^{1/2−α})`.
    pub fn mixed(alpha: f64, horizon: f64) -> Result<Self> {
        Self::new(alpha, horizon, 0.5 - alpha)
    }
}

#[inline]
fn space_weight(lambda: f64, theta: f64) -> f64 {
    if theta == 0.5 {
        1.0
    } else {
        libm::pow(lambda, 2.0 * theta - 1.0)
    }
}

/// `E‖A^θ(u(t) − u(s))‖²`, exact (no orthogonal term discarded).
pub fn increment_second_moment(a: &SpectralOperator, x: &SpectralVector, s: f64, t: f64, theta: f64) -> Result<f64> {
    a.check(x)?;
    if !(s >= 0.0) {
        return Err(param("s", s, "time must be nonnegative"));
    }
    if !(t >= 0.0) {
        return Err(param("t", t, "time must be nonnegative"));
    }
    let (lo, tau) = if s <= t { (s, t - s) } else { (t, s - t) };
    if tau == 0.0 {
        return Ok(0.0);
    }
    Ok(compensated_sum(
        a.eigenvalues()
            .iter()
            .zip(x.coefficients())
            .map(|(&l, &c)| space_weight(l, theta) * c * c * increment_kernel(l, lo, tau)),
    ))
}

/// `E‖A^θ u‖²_{L²(0,T;X)} = Σ λ_k^{2θ−1} x_k² [T/2 − (1−e^{−2λ_kT})/(4λ_k)]`.
pub fn l2_second_moment(a: &SpectralOperator, x: &SpectralVector, horizon: f64, theta: f64) -> Result<f64> {
    a.check(x)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(param("horizon", horizon, "must be positive"));
    }
    Ok(compensated_sum(l2_contributions(a, x, horizon, theta)))
}

fn l2_contributions<'a>(
    a: &'a SpectralOperator,
    x: &'a SpectralVector,
    horizon: f64,
    theta: f64,
) -> impl Iterator<Item = f64> + 'a {
    a.eigenvalues()
        .iter()
        .zip(x.coefficients())
        .map(move |(&l, &c)| space_weight(l, theta) * c * c * energy_kernel(l, horizon))
}

/// Per-mode L² contributions in ascending mode order.
pub fn l2_terms(a: &SpectralOperator, x: &SpectralVector, horizon: f64, theta: f64) -> Result<Vec<f64>> {
    a.check(x)?;
    Ok(l2_contributions(a, x, horizon, theta).collect())
}

/// Contribution of one mode to `E[u]²_{W^{α,2}(0,T;D(A^θ))}`.
pub fn seminorm_term(lambda: f64, coefficient: f64, q: &RegularityQuery, tol: f64) -> Result<f64> {
    if coefficient == 0.0 {
        check_seminorm_args(q.alpha, q.horizon, tol)?;
        return Ok(0.0);
    }
    let f = seminorm_factor(lambda, q.alpha, q.horizon, tol)?;
    Ok(space_weight(lambda, q.space_exponent) * coefficient * coefficient * f)
}

/// Per-mode seminorm contributions in ascending mode order.
pub fn seminorm_terms(a: &SpectralOperator, x: &SpectralVector, q: &RegularityQuery, tol: f64) -> Result<Vec<f64>> {
    a.check(x)?;
    a.eigenvalues()
        .iter()
        .zip(x.coefficients())
        .map(|(&l, &c)| seminorm_term(l, c, q, tol))
        .collect()
}

/// `E[u]²_{W^{α,2}(0,T;D(A^θ))}` for `α ∈ (0, 1/2)`; `α = 0` belongs to
/// [`l2_second_moment`].
pub fn seminorm_second_moment(a: &SpectralOperator, x: &SpectralVector, q: &RegularityQuery, tol: f64) -> Result<f64> {
    Ok(compensated_sum(seminorm_terms(a, x, q, tol)?))
}

/// Seminorm moment in the mixed scale `D(A^{1/2−α})`.
pub fn smr_second_moment(a: &SpectralOperator, x: &SpectralVector, alpha: f64, horizon: f64, tol: f64) -> Result<f64> {
    seminorm_second_moment(a, x, &RegularityQuery::mixed(alpha, horizon)?, tol)
}

/// `Γ(1−2α)/(2α)`.
pub fn komatsu_closed_form(alpha: f64) -> f64 {
    libm::tgamma(1.0 - 2.0 * alpha) / (2.0 * alpha)
}

/// `K_α = ∫_0^∞ (1 − e^{−s}) s^{−1−2α} ds` by quadrature.
///
/// Split at `s = 1`: on `[0, 1]` the substitution `s = w^{1/(1−2α)}` leaves the
/// smooth integrand `p·φ(s)`; on `[1, ∞)` the power part is exact and only
/// `∫_1^∞ e^{−s} s^{−1−2α} ds` needs quadrature.
pub fn komatsu_constant(alpha: f64, tol: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(param("alpha", alpha, "Komatsu's integral needs α in (0, 1/2)"));
    }
    if !(tol > 0.0) {
        return Err(param("tol", tol, "must be positive"));
    }
    let grading = 1.0 / (1.0 - 2.0 * alpha);
    let rule = Adaptive::relative(tol * 1e-2);
    let head = gauss_kronrod(|w| phi(libm::pow(w, grading)), 0.0, 1.0, &rule)?.value * grading;
    let decay = gauss_kronrod(|s| libm::exp(-s) * libm::pow(s, -1.0 - 2.0 * alpha), 1.0, 64.0, &rule)?.value;
    Ok(head + 1.0 / (2.0 * alpha) - decay)
}

/// Every constant and both sides of each inequality in the two-sided estimate
/// `E‖u‖²_{W^{α,2}(0,T;D(A^{1/2}))} ≂ ‖A^α x‖²`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct CertificateReport {
    pub truncation: usize,
    pub alpha: f64,
    pub horizon: f64,
    pub gap: f64,
    pub seminorm_moment: f64,
    pub l2_moment: f64,
    pub frac_norm: f64,
    pub x_norm: f64,
    pub c_alpha: f64,
    #[cfg_attr(feature = "serde", serde(rename = "KAlpha"))]
    pub k_alpha: f64,
    pub theta_alpha_t: f64,
    #[cfg_attr(feature = "serde", serde(rename = "CdeltaT"))]
    pub c_delta_t: f64,
    pub epsilon: f64,
    /// `T c_α ‖A^α x‖² − T θ_{α,T} ‖x‖²`.
    pub seminorm_lower_rhs: f64,
    /// `C_{δ,T} ‖x‖²`.
    pub l2_lower_rhs: f64,
    /// `ε T c_α ‖A^α x‖² + (C_{δ,T} − ε T θ_{α,T}) ‖x‖²`.
    pub lower_bound_rhs: f64,
    /// `2T K_α ‖A^α x‖² + (T/2) ‖x‖²`.
    pub upper_bound_rhs: f64,
    pub seminorm_bound_holds: bool,
    pub l2_bound_holds: bool,
    pub lower_bound_holds: bool,
    pub upper_bound_holds: bool,
    pub quadrature_tolerance: f64,
}

impl CertificateReport {
    pub fn all_hold(&self) -> bool {
        self.seminorm_bound_holds && self.l2_bound_holds && self.lower_bound_holds && self.upper_bound_holds
    }

    /// `E‖u‖²_{W^{α,2}}` = seminorm moment + L² moment.
    pub fn full_moment(&self) -> f64 {
        self.seminorm_moment + self.l2_moment
    }
}

/// `c_α = 2^{2α−2} K_α`.
pub fn c_alpha(alpha: f64, k_alpha: f64) -> f64 {
    libm::pow(2.0, 2.0 * alpha - 2.0) * k_alpha
}

/// `θ_{α,T} = 2^{2α−3} T^{−2α} / α`, the value of `¼∫_{T/2}^∞ s^{−1−2α} ds`.
pub fn theta_alpha_t(alpha: f64, horizon: f64) -> f64 {
    libm::pow(2.0, 2.0 * alpha - 3.0) * libm::pow(horizon, -2.0 * alpha) / alpha
}

/// `C_{δ,T} = T/2 − (1 − e^{−2Tδ})/(4δ)`.
pub fn c_delta_t(gap: f64, horizon: f64) -> f64 {
    energy_kernel(gap, horizon)
}

/// Builds the [`CertificateReport`] for a `D(A^{1/2})` query.
///
/// The seminorm moment carries a relative quadrature error of at most `tol`, so
/// the lower-bound checks allow that much slack on the left-hand side.
pub fn certificate(a: &SpectralOperator, x: &SpectralVector, q: &RegularityQuery, tol: f64) -> Result<CertificateReport> {
    let seminorm = seminorm_second_moment(a, x, q, tol)?;
    certificate_from_moment(a, x, q, tol, seminorm)
}

/// [`certificate`] with the seminorm moment supplied by the caller (e.g. from a
/// parallel per-mode evaluation reduced in mode order).
pub fn certificate_from_moment(
    a: &SpectralOperator,
    x: &SpectralVector,
    q: &RegularityQuery,
    tol: f64,
    seminorm: f64,
) -> Result<CertificateReport> {
    if q.space_exponent != 0.5 {
        return Err(param("space_exponent", q.space_exponent, "certificates are for D(A^{1/2})"));
    }
    check_seminorm_args(q.alpha, q.horizon, tol)?;
    let (alpha, horizon) = (q.alpha, q.horizon);
    let l2 = l2_second_moment(a, x, horizon, 0.5)?;
    let frac_sq = a.power_weighted_square(x, alpha);
    let x_sq = compensated_sum(x.coefficients().iter().map(|c| c * c));
    let k = komatsu_constant(alpha, tol)?;
    let c = c_alpha(alpha, k);
    let theta = theta_alpha_t(alpha, horizon);
    let cdt = c_delta_t(a.gap(), horizon);
    let epsilon = (cdt / (2.0 * horizon * theta)).min(1.0);

    let seminorm_lower_rhs = horizon * c * frac_sq - horizon * theta * x_sq;
    let l2_lower_rhs = cdt * x_sq;
    let lower_bound_rhs = epsilon * horizon * c * frac_sq + (cdt - epsilon * horizon * theta) * x_sq;
    let upper_bound_rhs = 2.0 * horizon * k * frac_sq + 0.5 * horizon * x_sq;
    let full = seminorm + l2;
    let slack = tol * seminorm;
    // l2 is closed form; 1e-12 relative covers its rounding.
    let l2_slack = 1e-12 * l2;

    Ok(CertificateReport {
        truncation: a.truncation(),
        alpha,
        horizon,
        gap: a.gap(),
        seminorm_moment: seminorm,
        l2_moment: l2,
        frac_norm: libm::sqrt(frac_sq),
        x_norm: libm::sqrt(x_sq),
        c_alpha: c,
        k_alpha: k,
        theta_alpha_t: theta,
        c_delta_t: cdt,
        epsilon,
        seminorm_lower_rhs,
        l2_lower_rhs,
        lower_bound_rhs,
        upper_bound_rhs,
        seminorm_bound_holds: seminorm + slack >= seminorm_lower_rhs,
        l2_bound_holds: l2 + l2_slack >= l2_lower_rhs,
        lower_bound_holds: full + slack + l2_slack >= lower_bound_rhs,
        upper_bound_holds: full - slack - l2_slack <= upper_bound_rhs,
        quadrature_tolerance: tol,
    })
}

/// `(E[u]² + E‖u‖²_{L²})^{1/2} / ‖A^α x‖` in `D(A^{1/2})`.
pub fn equivalence_ratio(a: &SpectralOperator, x: &SpectralVector, q: &RegularityQuery, tol: f64) -> Result<f64> {
    a.check(x)?;
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    if q.space_exponent != 0.5 {
        return Err(param("space_exponent", q.space_exponent, "the equivalence is stated in D(A^{1/2})"));
    }
    let semi = seminorm_second_moment(a, x, q, tol)?;
    let l2 = l2_second_moment(a, x, q.horizon, 0.5)?;
    let frac = a.fractional_norm(x, q.alpha)?;
    Ok(libm::sqrt(semi + l2) / frac)
}

/// Ratio for a single unit mode, `((F(λ) + E(λ)) / λ^{2α})^{1/2}`.
pub fn mode_equivalence_ratio(lambda: f64, alpha: f64, horizon: f64, tol: f64) -> Result<f64> {
    let f = seminorm_factor(lambda, alpha, horizon, tol)?;
    let e = energy_kernel(lambda, horizon);
    Ok(libm::sqrt((f + e) / libm::pow(lambda, 2.0 * alpha)))
}

/// Compensated total of per-mode terms; convenience for parallel callers.
pub fn reduce_terms(terms: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    acc.extend(terms.iter().copied());
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn single(l: f64) -> (SpectralOperator, SpectralVector) {
        (
            SpectralOperator::new(vec![l]).unwrap(),
            SpectralVector::new(vec![1.0]).unwrap(),
        )
    }

    #[test]
    fn phi_helpers_agree_across_branch() {
        for z in [0.49, 0.5, 0.51] {
            assert!((one_minus_phi(z) - (1.0 - phi(z))).abs() < 1e-15);
        }
        assert!((one_minus_phi(1e-8) - (0.5e-8 - 1e-16 / 6.0)).abs() < 1e-24);
        assert_eq!(phi(0.0), 1.0);
    }

    #[test]
    fn increment_examples() {
        let (a, x) = single(1.0);
        assert_eq!(increment_second_moment(&a, &x, 0.7, 0.7, 0.5).unwrap(), 0.0);
        let v = increment_second_moment(&a, &x, 0.0, 1.0, 0.5).unwrap();
        assert!((v - (1.0 - (-2f64).exp()) / 2.0).abs() < 1e-15);
        assert!((v - 0.43233).abs() < 1e-5);
        let w = increment_second_moment(&a, &x, 20.0, 21.0, 0.5).unwrap();
        assert!((w - (1.0 - (-1f64).exp())).abs() < 1e-15);
        // symmetric in (s, t)
        assert_eq!(
            increment_second_moment(&a, &x, 21.0, 20.0, 0.5).unwrap(),
            w
        );
        assert!(increment_second_moment(&a, &x, -1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn increment_dominates_discarded_lower_bound() {
        for &l in &[1e-3, 0.5, 1.0, 7.0, 1e4] {
            for &s in &[0.0, 1e-3, 0.3, 2.0, 50.0] {
                for &tau in &[1e-7, 1e-3, 0.1, 1.0, 10.0] {
                    let m = increment_kernel(l, s, tau);
                    let lower = 0.5 * (-(-2.0 * l * tau).exp_m1());
                    assert!(m >= lower * (1.0 - 1e-15), "{l} {s} {tau}");
                }
            }
        }
    }

    #[test]
    fn l2_examples() {
        let (a, x) = single(1.0);
        let v = l2_second_moment(&a, &x, 1.0, 0.5).unwrap();
        let exact = 0.5 - (1.0 - (-2f64).exp()) / 4.0;
        assert!((v - exact).abs() < 1e-15);
        assert!((v - 0.28383).abs() < 1e-5);
        assert_eq!(l2_second_moment(&a, &SpectralVector::zeros(1), 1.0, 0.5).unwrap(), 0.0);
        for &(delta, t) in &[(0.3, 2.0), (5.0, 1.0), (1e3, 0.25)] {
            let (a, x) = single(delta);
            let v = l2_second_moment(&a, &x, t, 0.5).unwrap();
            let c = t / 2.0 - (1.0 - (-2.0 * t * delta).exp()) / (4.0 * delta);
            assert!((v - c).abs() <= 1e-14 * c);
        }
        assert!(l2_second_moment(&a, &x, 0.0, 0.5).is_err());
    }

    #[test]
    fn seminorm_zero_and_scaling() {
        let (a, x) = single(1.0);
        let q = RegularityQuery::theorem(0.25, 1.0).unwrap();
        assert_eq!(seminorm_second_moment(&a, &SpectralVector::zeros(1), &q, 1e-10).unwrap(), 0.0);
        let v = seminorm_second_moment(&a, &x, &q, 1e-10).unwrap();
        let w = seminorm_second_moment(&a, &x.scaled(2.0), &q, 1e-10).unwrap();
        assert!((w - 4.0 * v).abs() <= 1e-15 * w);
    }

    #[test]
    fn seminorm_rejects_alpha_zero() {
        let (a, x) = single(1.0);
        let q = RegularityQuery::theorem(0.0, 1.0).unwrap();
        assert!(seminorm_second_moment(&a, &x, &q, 1e-10).is_err());
        assert!(RegularityQuery::theorem(0.5, 1.0).is_err());
    }

    #[test]
    fn graded_and_log_routes_agree() {
        for &alpha in &[0.01, 0.1, 0.25, 0.4, 0.49] {
            for &l in &[1e-2, 1.0, 37.0, 1e4, 1e8] {
                for &t in &[0.5, 1.0, 4.0] {
                    let g = seminorm_factor(l, alpha, t, 1e-11).unwrap();
                    let e = seminorm_factor_log(l, alpha, t, 1e-11).unwrap();
                    assert!((g - e).abs() <= 1e-9 * g, "α={alpha} λ={l} T={t}: {g} vs {e}");
                }
            }
        }
    }

    #[test]
    fn seminorm_self_consistent_under_tol_refinement() {
        let v1 = seminorm_factor(1.0, 0.25, 1.0, 1e-8).unwrap();
        let v2 = seminorm_factor(1.0, 0.25, 1.0, 1e-9).unwrap();
        assert!((v1 - v2).abs() <= 1e-8 * v2);
    }

    #[test]
    fn komatsu_examples() {
        let k = komatsu_constant(0.25, 1e-10).unwrap();
        assert!((k - 2.0 * core::f64::consts::PI.sqrt()).abs() < 1e-9);
        assert!((k - 3.5449).abs() < 1e-4);
        // Γ(0.8)/0.2 and Γ(0.2)/0.8
        assert!((komatsu_constant(0.1, 1e-10).unwrap() - 5.821_148_568_626_515).abs() < 1e-8);
        assert!((komatsu_constant(0.4, 1e-10).unwrap() - 5.738_554_639_998_506).abs() < 1e-8);
        assert!(komatsu_constant(0.0, 1e-10).is_err());
        assert!(komatsu_constant(0.5, 1e-10).is_err());
    }

    #[test]
    fn certificate_zero_vector() {
        let a = SpectralOperator::new(vec![1.0, 4.0]).unwrap();
        let x = SpectralVector::zeros(2);
        let q = RegularityQuery::theorem(0.25, 1.0).unwrap();
        let r = certificate(&a, &x, &q, 1e-10).unwrap();
        assert_eq!(r.seminorm_moment, 0.0);
        assert_eq!(r.l2_moment, 0.0);
        assert!(r.all_hold());
        assert!(matches!(equivalence_ratio(&a, &x, &q, 1e-10), Err(Error::ZeroVector)));
    }

    #[test]
    fn certificate_single_mode_long_horizon() {
        let (a, x) = single(1.0);
        let q = RegularityQuery::theorem(0.25, 4.0).unwrap();
        let r = certificate(&a, &x, &q, 1e-10).unwrap();
        assert!(r.seminorm_bound_holds, "{r:?}");
        assert!(r.seminorm_moment >= r.seminorm_lower_rhs);
        assert!(r.all_hold());
        assert!((r.c_alpha - r.k_alpha / (2.0 * 2f64.sqrt())).abs() < 1e-14);
        assert!(r.epsilon > 0.0 && r.epsilon <= 1.0);
    }

    #[test]
    fn certificate_small_alpha() {
        let (a, x) = single(1.0);
        let q = RegularityQuery::theorem(0.01, 1.0).unwrap();
        let r = certificate(&a, &x, &q, 1e-10).unwrap();
        assert!(r.all_hold(), "{r:?}");
        assert!(r.lower_bound_rhs <= r.full_moment() && r.full_moment() <= r.upper_bound_rhs);
    }

    #[test]
    fn ratio_homogeneous() {
        let a = SpectralOperator::new(vec![1.0, 3.0, 50.0]).unwrap();
        let x = SpectralVector::new(vec![0.3, -1.0, 0.05]).unwrap();
        let q = RegularityQuery::theorem(0.3, 1.0).unwrap();
        let r1 = equivalence_ratio(&a, &x, &q, 1e-10).unwrap();
        let r2 = equivalence_ratio(&a, &x.scaled(1.0 / x.norm()), &q, 1e-10).unwrap();
        assert!((r1 - r2).abs() < 1e-13 * r1);
        let (a1, x1) = single(1.0);
        let s1 = equivalence_ratio(&a1, &x1, &q, 1e-10).unwrap();
        let s2 = equivalence_ratio(&a1, &x1.scaled(-7.5), &q, 1e-10).unwrap();
        assert!((s1 - s2).abs() < 1e-13 * s1);
    }

    #[test]
    fn smr_unit_eigenvalue_matches_theorem_scale() {
        let (a, x) = single(1.0);
        let s = smr_second_moment(&a, &x, 0.3, 1.0, 1e-10).unwrap();
        let q = RegularityQuery::theorem(0.3, 1.0).unwrap();
        let t = seminorm_second_moment(&a, &x, &q, 1e-10).unwrap();
        assert_eq!(s, t);
        assert_eq!(smr_second_moment(&a, &SpectralVector::zeros(1), 0.3, 1.0, 1e-10).unwrap(), 0.0);
    }
}
