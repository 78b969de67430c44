use proptest::prelude::*;

use timereg::moments::{
    certificate, l2_second_moment, seminorm_factor, seminorm_factor_log, seminorm_second_moment, RegularityQuery,
};
use timereg::{SpectralOperator, SpectralVector};

fn operator(eigs: &[f64]) -> SpectralOperator {
    SpectralOperator::new(eigs.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadrature_routes_agree(l in -3.0f64..7.0, alpha in 0.02f64..0.48, t in 0.1f64..5.0) {
        let lambda = 10f64.powf(l);
        let g = seminorm_factor(lambda, alpha, t, 1e-11).unwrap();
        let h = seminorm_factor_log(lambda, alpha, t, 1e-11).unwrap();
        prop_assert!((g - h).abs() <= 1e-9 * g, "{} vs {}", g, h);
    }

    #[test]
    fn moments_are_quadratic_in_data(
        coefs in prop::collection::vec(-2.0f64..2.0, 1..12),
        c in -3.0f64..3.0,
        alpha in 0.05f64..0.45,
    ) {
        let a = operator(&(1..=coefs.len()).map(|k| (k * k) as f64).collect::<Vec<_>>());
        let x = SpectralVector::new(coefs).unwrap();
        let q = RegularityQuery::theorem(alpha, 1.0).unwrap();
        let s1 = seminorm_second_moment(&a, &x, &q, 1e-10).unwrap();
        let s2 = seminorm_second_moment(&a, &x.scaled(c), &q, 1e-10).unwrap();
        prop_assert!((s2 - c * c * s1).abs() <= 1e-12 * (1.0 + s2.abs()));
        let l1 = l2_second_moment(&a, &x, 1.0, 0.5).unwrap();
        let l2 = l2_second_moment(&a, &x.scaled(c), 1.0, 0.5).unwrap();
        prop_assert!((l2 - c * c * l1).abs() <= 1e-12 * (1.0 + l2.abs()));
    }

    #[test]
    fn moments_grow_with_truncation(
        coefs in prop::collection::vec(-1.0f64..1.0, 2..16),
        alpha in 0.05f64..0.45,
    ) {
        let n = coefs.len();
        let a = operator(&(1..=n).map(|k| (k as f64).powf(1.5)).collect::<Vec<_>>());
        let x = SpectralVector::new(coefs).unwrap();
        let q = RegularityQuery::theorem(alpha, 2.0).unwrap();
        let mut prev = 0.0;
        for m in 1..=n {
            let v = seminorm_second_moment(&a.truncate(m), &x.truncate(m), &q, 1e-10).unwrap();
            prop_assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn certificates_hold(
        coefs in prop::collection::vec(-1.0f64..1.0, 1..24),
        alpha in 0.05f64..0.45,
        t in 0.25f64..6.0,
        scale in 0.1f64..50.0,
    ) {
        prop_assume!(coefs.iter().any(|c| *c != 0.0));
        let a = operator(&(1..=coefs.len()).map(|k| scale * (k * k) as f64).collect::<Vec<_>>());
        let x = SpectralVector::new(coefs).unwrap();
        let r = certificate(&a, &x, &RegularityQuery::theorem(alpha, t).unwrap(), 1e-10).unwrap();
        prop_assert!(r.all_hold(), "{:?}", r);
    }
}
