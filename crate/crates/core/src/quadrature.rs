//! One-dimensional quadrature: globally adaptive Gauss–Kronrod (7, 15) and
//! composite Gauss–Legendre.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];

const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Stopping rule for [`gauss_kronrod`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Adaptive {
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol: 0.0,
            max_panels: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: libm::fabs((kronrod - gauss) * half),
    }
}

/// Globally adaptive (7, 15) Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed error
/// is below `max(abs_tol, rel_tol·|I|)`. Exhausting `max_panels`, or reaching
/// panels too narrow to split, is reported as [`Error::QuadratureNotConverged`].
/// The integrand is never evaluated at the endpoints.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rule: &Adaptive) -> Result<Estimate> {
    let first = kronrod_panel(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut panels = 1;
    loop {
        let target = rule.abs_tol.max(rule.rel_tol * libm::fabs(value));
        if error <= target {
            break;
        }
        if panels >= rule.max_panels {
            return Err(Error::QuadratureNotConverged {
                tol: rule.rel_tol,
                estimate: error / libm::fabs(value).max(f64::MIN_POSITIVE),
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::QuadratureNotConverged {
                tol: rule.rel_tol,
                estimate: error / libm::fabs(value).max(f64::MIN_POSITIVE),
            });
        }
        let left = kronrod_panel(&mut f, worst.a, mid);
        let right = kronrod_panel(&mut f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        panels += 1;
        // Resum occasionally so the running totals do not drift.
        if panels % 64 == 0 {
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    let mut sorted: alloc::vec::Vec<Panel> = heap.into_vec();
    sorted.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = crate::sum::compensated_sum(sorted.iter().map(|p| p.value));
    let error = sorted.iter().map(|p| p.error).sum();
    Ok(Estimate {
        value,
        error,
        panels,
    })
}

/// Eight-point Gauss–Legendre rule on each of `panels` equal subintervals.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = crate::sum::NeumaierSum::new();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let center = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for j in 0..4 {
            let dx = half * GL8_X[j];
            s += GL8_W[j] * (f(center - dx) + f(center + dx));
        }
        acc.add(s * half);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_polynomials_exactly() {
        let est = gauss_kronrod(|x| x.powi(9) - 3.0 * x * x, -1.0, 2.0, &Adaptive::relative(1e-14)).unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((est.value - exact).abs() < 1e-12 * exact.abs());
        assert_eq!(est.panels, 1);
    }

    #[test]
    fn kronrod_handles_integrable_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let est = gauss_kronrod(|x| 1.0 / x.sqrt(), 0.0, 1.0, &Adaptive::relative(1e-10)).unwrap();
        assert!((est.value - 2.0).abs() < 1e-9, "{}", est.value);
    }

    #[test]
    fn kronrod_reports_failure() {
        let rule = Adaptive {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_panels: 3,
        };
        let err = gauss_kronrod(|x| 1.0 / x.sqrt(), 0.0, 1.0, &rule).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }

    #[test]
    fn legendre_composite_converges() {
        let v = gauss_legendre(libm::exp, 0.0, 1.0, 4);
        assert!((v - (core::f64::consts::E - 1.0)).abs() < 1e-14);
    }
}
