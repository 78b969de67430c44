use std::f64::consts::PI;

use timereg::moments::{
    certificate, energy_kernel, increment_kernel, komatsu_closed_form, komatsu_constant, l2_second_moment,
    lag_integral, seminorm_factor, seminorm_factor_log, seminorm_second_moment, smr_second_moment, RegularityQuery,
};
use timereg::quadrature::{gauss_kronrod, Adaptive};
use timereg::sweep::{verdict, TruncationSweep, Verdict};
use timereg::{PowerFamily, SpectralOperator, SpectralVector};

fn unit_mode(l: f64) -> (SpectralOperator, SpectralVector) {
    (SpectralOperator::new(vec![l]).unwrap(), SpectralVector::new(vec![1.0]).unwrap())
}

#[test]
fn l2_identity_single_mode() {
    let (a, x) = unit_mode(1.0);
    let v = l2_second_moment(&a, &x, 1.0, 0.5).unwrap();
    let exact = 0.5 - (1.0 - (-2.0f64).exp()) / 4.0;
    assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    assert!((v - 0.283834).abs() < 1e-6);
}

#[test]
fn komatsu_against_gamma() {
    // Γ(1−2α)/(2α) from an independent Lanczos evaluation
    fn gamma(z: f64) -> f64 {
        const G: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if z < 0.5 {
            return PI / ((PI * z).sin() * gamma(1.0 - z));
        }
        let z = z - 1.0;
        let t = z + 7.5;
        let s: f64 = G[0] + (1..9).map(|i| G[i] / (z + i as f64)).sum::<f64>();
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * s
    }
    for &alpha in &[0.05, 0.1, 0.25, 0.4, 0.45] {
        let oracle = gamma(1.0 - 2.0 * alpha) / (2.0 * alpha);
        let k = komatsu_constant(alpha, 1e-10).unwrap();
        assert!((k - oracle).abs() < 1e-8 * oracle, "α={alpha}: {k} vs {oracle}");
        assert!((komatsu_closed_form(alpha) - oracle).abs() < 1e-10 * oracle);
    }
    assert!((komatsu_constant(0.25, 1e-10).unwrap() - 2.0 * PI.sqrt()).abs() < 1e-9);
}

#[test]
fn seminorm_matches_brute_force_double_integral() {
    // E[u]² = λ^{2θ−1}x² · 2∫_0^T∫_0^t M(λ, s, t−s)(t−s)^{−1−2α} ds dt
    let rule = Adaptive {
        max_panels: 50_000,
        ..Adaptive::relative(1e-9)
    };
    for &(lambda, alpha, horizon) in &[(1.0, 0.2, 1.0), (10.0, 0.35, 1.0), (3.0, 0.1, 2.0)] {
        let brute = 2.0
            * gauss_kronrod(
                |t| {
                    gauss_kronrod(
                        |r| increment_kernel(lambda, t - r, r) * r.powf(-1.0 - 2.0 * alpha),
                        0.0,
                        t,
                        &rule,
                    )
                    .unwrap()
                    .value
                },
                0.0,
                horizon,
                &rule,
            )
            .unwrap()
            .value;
        let (a, x) = unit_mode(lambda);
        let q = RegularityQuery::theorem(alpha, horizon).unwrap();
        let v = seminorm_second_moment(&a, &x, &q, 1e-10).unwrap();
        assert!((v - brute).abs() < 1e-4 * brute, "λ={lambda} α={alpha}: {v} vs {brute}");
    }
}

#[test]
fn lag_integral_matches_quadrature_of_increment_kernel() {
    let rule = Adaptive::relative(1e-12);
    for &(l, tau, t) in &[(1.0, 0.3, 1.0), (50.0, 0.01, 2.0), (1e-3, 0.5, 1.0)] {
        let q = gauss_kronrod(|s| increment_kernel(l, s, tau), 0.0, t - tau, &rule).unwrap().value;
        assert!((lag_integral(l, tau, t) - q).abs() < 1e-11 * q.max(1e-300));
    }
}

#[test]
fn short_time_increments_are_linear() {
    // M(λ, s, τ) = λτ + O(τ²) for every start time
    for &l in &[0.5, 1.0, 20.0] {
        for &s in &[0.0, 0.3, 5.0] {
            let tau = 1e-7;
            let slope = increment_kernel(l, s, tau) / tau;
            assert!((slope - l).abs() < 1e-5 * l, "λ={l} s={s}: {slope}");
        }
    }
}

#[test]
fn energy_kernel_limits() {
    // large λT: T/2 − 1/(4λ); small λT: λT²/2
    assert!((energy_kernel(1e6, 1.0) - (0.5 - 0.25e-6)).abs() < 1e-15);
    let small = energy_kernel(1e-8, 1.0);
    assert!((small - 0.5e-8).abs() < 1e-15);
}

#[test]
fn certificates_hold_for_random_vectors() {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut uniform = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let a = SpectralOperator::new((1..=64).map(|k| (k * k) as f64).collect()).unwrap();
    for _ in 0..4 {
        let decay = 0.6 + 1.5 * uniform();
        let x = SpectralVector::new((1..=64).map(|k| (2.0 * uniform() - 1.0) * (k as f64).powf(-decay)).collect())
            .unwrap();
        for &alpha in &[0.1, 0.25, 0.4] {
            for &t in &[1.0, 4.0] {
                let q = RegularityQuery::theorem(alpha, t).unwrap();
                let r = certificate(&a, &x, &q, 1e-9).unwrap();
                assert!(r.all_hold(), "{r:?}");
            }
        }
    }
}

#[test]
fn per_mode_ratio_is_bounded_uniformly() {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &alpha in &[0.1, 0.25, 0.4] {
        for &l in &[1.0, 1e2, 1e4, 1e6] {
            let r = timereg::moments::mode_equivalence_ratio(l, alpha, 1.0, 1e-10).unwrap();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    assert!(hi / lo < 50.0, "{lo} {hi}");
}

#[test]
fn seminorm_factor_large_lambda_asymptotics() {
    // for λT ≫ 1, G ≈ (T − τ)(1 − e^{−λτ}), so
    // F ≈ 2Tλ^{2α}K_α − 2T^{1−2α}(1/(2α) + 1/(1−2α))
    for &alpha in &[0.1, 0.3] {
        for &t in &[1.0, 3.0] {
            let l = 1e8;
            let f = seminorm_factor(l, alpha, t, 1e-12).unwrap();
            let limit = 2.0 * t * l.powf(2.0 * alpha) * komatsu_closed_form(alpha)
                - 2.0 * t.powf(1.0 - 2.0 * alpha) * (1.0 / (2.0 * alpha) + 1.0 / (1.0 - 2.0 * alpha));
            assert!((f - limit).abs() < 1e-6 * limit, "α={alpha}: {f} vs {limit}");
        }
    }
}

#[test]
fn seminorm_factor_resolves_end_layer() {
    // 40-digit adaptive quadrature of 2∫τ^{−1−2α}G dτ with breakpoints at 10^k/λ from both ends
    let cases = [
        (10f64.powf(2.5578736108017908), 0.02, 2.93381882724562, 43.884_216_330_374_18),
        (10f64.powf(2.906962151994329), 0.09673772754080685, 2.8845657361263872, 95.842_564_397_894_69),
    ];
    for (lambda, alpha, t, exact) in cases {
        for v in [seminorm_factor(lambda, alpha, t, 1e-11).unwrap(), seminorm_factor_log(lambda, alpha, t, 1e-11).unwrap()] {
            assert!((v - exact).abs() < 1e-10 * exact, "λ={lambda}: {v} vs {exact}");
        }
    }
}

fn dyadic(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|j| 1usize << j).collect()
}

#[test]
fn power_family_sweeps_follow_classifier() {
    let fam = PowerFamily::new(1.0, 1.0, 2.0, 1.0).unwrap();
    let (a, x) = (fam.operator(1 << 11).unwrap(), fam.vector(1 << 11));
    let q = RegularityQuery::theorem(0.35, 1.0).unwrap();
    let terms = timereg::moments::seminorm_terms(&a, &x, &q, 1e-8).unwrap();
    let sweep = TruncationSweep::from_terms(&terms, &dyadic(6, 11)).unwrap();
    // 4α − 2β + 1 with β = 1, γ = 2
    let expected = 4.0 * 0.35 - 1.0;
    match verdict(&sweep, 0.01) {
        Verdict::Diverging { slope } => assert!((slope - expected).abs() < 0.1 * expected, "{slope}"),
        v => panic!("{v:?}"),
    }
}

#[test]
fn smr_is_finite_for_rough_data() {
    // x_k = k^{-0.51}: not in D(A^{0.3}) but the mixed-scale moment converges
    let fam = PowerFamily::new(1.0, 0.51, 2.0, 1.0).unwrap();
    assert!(matches!(fam.classify(0.3).unwrap(), timereg::Membership::Nonmember { .. }));
    let a = fam.operator(256).unwrap();
    let x = fam.vector(256);
    let small = smr_second_moment(&a.truncate(128), &x.truncate(128), 0.3, 1.0, 1e-9).unwrap();
    let big = smr_second_moment(&a, &x, 0.3, 1.0, 1e-9).unwrap();
    assert!(big > small && big.is_finite());
}
