//! Truncation sweeps: moments as functions of the number of modes kept.
//!
//! A finite truncation is always finite, so membership in `D(A^α)` is never
//! decided at a single `N`. A sweep reports the partial sums at each requested
//! truncation, and the verdict looks at how the dyadic block increments
//! `S(N_{j+1}) − S(N_j)` behave: growing or flat blocks mean divergence,
//! shrinking blocks mean a convergent (Cauchy) sequence.

use alloc::vec::Vec;

use crate::error::param;
use crate::sum::prefix_sums;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TruncationSweep {
    pub truncations: Vec<usize>,
    pub values: Vec<f64>,
}

impl TruncationSweep {
    /// Partial sums of per-mode `terms` (ascending mode order) at each of the
    /// ascending `truncations`.
    pub fn from_terms(terms: &[f64], truncations: &[usize]) -> Result<Self> {
        check_truncations(truncations, terms.len())?;
        let prefix = prefix_sums(terms);
        Ok(Self {
            truncations: truncations.to_vec(),
            values: truncations.iter().map(|&n| prefix[n - 1]).collect(),
        })
    }

    /// `S(N_{j+1}) − S(N_j)`.
    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Relative change between the two largest truncations.
    pub fn relative_change(&self) -> f64 {
        match self.values.as_slice() {
            [.., a, b] if *b != 0.0 => libm::fabs(b - a) / libm::fabs(*b),
            [.., _, _] => 0.0,
            _ => f64::NAN,
        }
    }

    /// Least-squares slope of `log S(N)` against `log N`.
    pub fn value_slope(&self) -> Option<f64> {
        let xs: Vec<f64> = self.truncations.iter().map(|&n| libm::log(n as f64)).collect();
        loglog_slope(&xs, &self.values)
    }

    /// Least-squares slope of `log(S(N_{j+1}) − S(N_j))` against `log N_{j+1}`.
    ///
    /// For partial sums growing like `C N^p + const` this recovers `p` without
    /// the bias the constant puts on [`value_slope`](Self::value_slope).
    pub fn increment_slope(&self) -> Option<f64> {
        let xs: Vec<f64> = self.truncations[1..].iter().map(|&n| libm::log(n as f64)).collect();
        loglog_slope(&xs, &self.increments())
    }
}

pub(crate) fn check_truncations(truncations: &[usize], available: usize) -> Result<()> {
    if truncations.is_empty() {
        return Err(param("truncations", 0.0, "at least one truncation is required"));
    }
    if truncations[0] == 0 {
        return Err(param("truncations", 0.0, "truncations must be positive"));
    }
    if truncations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(param("truncations", f64::NAN, "truncations must be strictly ascending"));
    }
    let last = *truncations.last().unwrap_or(&0);
    if last > available {
        return Err(param("truncations", last as f64, "exceeds the number of modes available"));
    }
    Ok(())
}

/// Least-squares slope of `log y` on `x`; `None` if fewer than two positive
/// `y` values remain.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0 && y.is_finite())
        .map(|(&x, &y)| (x, libm::log(y)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Outcome of a truncation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "verdict", rename_all = "kebab-case"))]
pub enum Verdict {
    /// The two largest truncations agree to the requested relative tolerance.
    FiniteStable { relative_change: f64 },
    /// Block increments do not shrink; `slope` is their log-log growth rate.
    Diverging { slope: f64 },
    /// Block increments shrink (the sequence is Cauchy) but the top two
    /// truncations still differ by more than the tolerance.
    SlowlyConvergent { relative_change: f64, increment_slope: f64 },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::FiniteStable { .. } => "finite-stable",
            Verdict::Diverging { .. } => "diverging",
            Verdict::SlowlyConvergent { .. } => "slowly-convergent",
        }
    }
}

/// Classifies a sweep with relative stability tolerance `tol`.
pub fn verdict(sweep: &TruncationSweep, tol: f64) -> Verdict {
    let relative_change = sweep.relative_change();
    if relative_change < tol {
        return Verdict::FiniteStable { relative_change };
    }
    match sweep.increment_slope() {
        Some(slope) if slope < 0.0 => Verdict::SlowlyConvergent {
            relative_change,
            increment_slope: slope,
        },
        Some(slope) => Verdict::Diverging { slope },
        None => Verdict::Diverging { slope: f64::NAN },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic(lo: u32, hi: u32) -> Vec<usize> {
        (lo..=hi).map(|j| 1usize << j).collect()
    }

    #[test]
    fn power_growth_recovered_from_increments() {
        // S(N) = Σ k^{-0.8} ~ 5 N^{0.2} − 4.44
        let terms: Vec<f64> = (1..=1 << 13).map(|k| (k as f64).powf(-0.8)).collect();
        let s = TruncationSweep::from_terms(&terms, &dyadic(6, 13)).unwrap();
        let slope = s.increment_slope().unwrap();
        assert!((slope - 0.2).abs() < 0.01, "{slope}");
        // the raw slope is biased by the additive constant
        assert!(s.value_slope().unwrap() > 0.25);
        assert!(matches!(verdict(&s, 0.01), Verdict::Diverging { .. }));
    }

    #[test]
    fn summable_series_is_not_diverging() {
        let terms: Vec<f64> = (1..=1 << 13).map(|k| (k as f64).powf(-3.0)).collect();
        let s = TruncationSweep::from_terms(&terms, &dyadic(6, 13)).unwrap();
        assert!(matches!(verdict(&s, 0.01), Verdict::FiniteStable { .. }));
        let terms: Vec<f64> = (1..=1 << 13).map(|k| (k as f64).powf(-1.2)).collect();
        let s = TruncationSweep::from_terms(&terms, &dyadic(6, 13)).unwrap();
        assert!(matches!(verdict(&s, 0.01), Verdict::SlowlyConvergent { .. }));
    }

    #[test]
    fn rejects_bad_truncations() {
        let terms = [1.0; 8];
        assert!(TruncationSweep::from_terms(&terms, &[]).is_err());
        assert!(TruncationSweep::from_terms(&terms, &[0, 4]).is_err());
        assert!(TruncationSweep::from_terms(&terms, &[4, 2]).is_err());
        assert!(TruncationSweep::from_terms(&terms, &[4, 16]).is_err());
    }
}
