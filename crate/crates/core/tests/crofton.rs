use std::f64::consts::{FRAC_PI_2, PI, TAU};

use lemniscate_core::crofton::{modulus_along, real_root_count, realpart_along};
use lemniscate_core::experiments::{random_polynomial, stream_rng};
use lemniscate_core::{
    circle_count_realpart, crofton_lemniscate_length, crofton_length, deficiency_integral,
    lemma1_check, line_count_modulus, line_count_realpart, realpart_curve_length, Complex64,
    CountField, CroftonError, LineCoord, Polynomial, Sampler,
};
use proptest::prelude::*;
use rand::Rng;

fn bernoulli() -> f64 {
    let (mut a, mut b) = (1.0f64, 0.5f64.sqrt());
    for _ in 0..40 {
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    TAU / a
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * t + k)
}

/// Sign changes of `c` on `m` equispaced samples of `[-w, w]`.
fn sweep_sign_changes(c: &[f64], w: f64, m: usize) -> usize {
    let mut prev = horner(c, -w);
    let mut changes = 0;
    for k in 1..=m {
        let v = horner(c, -w + 2.0 * w * k as f64 / m as f64);
        if v != 0.0 {
            if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
                changes += 1;
            }
            prev = v;
        }
    }
    changes
}

#[test]
fn realpart_line_examples() {
    assert_eq!(
        line_count_realpart(&Polynomial::monomial(2), LineCoord::new(0.0, 0.0), 10.0).unwrap(),
        1
    );
    assert!(
        line_count_realpart(&Polynomial::monomial(2), LineCoord::new(0.3, 0.5), 10.0).unwrap() <= 2
    );
    assert_eq!(
        line_count_realpart(&Polynomial::monomial(3), LineCoord::new(0.37, 0.41), 10.0).unwrap(),
        3
    );
}

#[test]
fn modulus_line_examples() {
    let p = Polynomial::monomial(1);
    for rho in [0.0, 0.3, -0.7, 0.99] {
        assert_eq!(
            line_count_modulus(&p, LineCoord::new(1.1, rho), 5.0).unwrap(),
            2
        );
    }
    for rho in [1.01, -1.5, 4.0] {
        assert_eq!(
            line_count_modulus(&p, LineCoord::new(1.1, rho), 5.0).unwrap(),
            0
        );
    }
    let p = Polynomial::unit_roots(2);
    assert_eq!(
        line_count_modulus(&p, LineCoord::new(FRAC_PI_2, 0.0), 3.0).unwrap(),
        3
    );
    assert_eq!(
        line_count_modulus(&p, LineCoord::new(0.2, 3.0), 10.0).unwrap(),
        0
    );
}

#[test]
fn circle_count_examples() {
    for n in 1..=6 {
        for rho in [0.3, 1.0, 2.5] {
            assert_eq!(
                circle_count_realpart(&Polynomial::monomial(n), rho).unwrap(),
                2 * n
            );
        }
    }
    let f: Polynomial = "2; 1,0; 0,0; 1,0".parse().unwrap();
    assert_eq!(circle_count_realpart(&f, 2.0).unwrap(), 4);
    assert_eq!(circle_count_realpart(&f, 0.5).unwrap(), 0);
}

#[test]
fn crofton_lengths_of_known_curves() {
    let circle = crofton_lemniscate_length(&Polynomial::monomial(1), Sampler::default()).unwrap();
    assert!((circle.value - TAU).abs() < 5e-3 * TAU, "{}", circle.value);

    for n in 1..=4 {
        let est = crofton_length(
            &CountField::RealPart(Polynomial::monomial(n)),
            1.0,
            Sampler::default(),
        )
        .unwrap();
        let exact = 2.0 * n as f64;
        assert!(
            (est.value - exact).abs() < 1e-2 * exact,
            "n={n}: {}",
            est.value
        );
    }

    let exact = bernoulli();
    let est = crofton_lemniscate_length(&Polynomial::unit_roots(2), Sampler::default()).unwrap();
    assert!(
        (est.value - exact).abs() < 1e-2 * exact,
        "{} vs {exact}",
        est.value
    );
}

#[test]
fn monte_carlo_unit_circle() {
    // in the radius-1 window every chord meets the circle twice; a wider window has variance
    let field = CountField::Modulus(Polynomial::monomial(1));
    let est = crofton_length(
        &field,
        2.0,
        Sampler::Mc {
            n: 1_000_000,
            seed: 11,
        },
    )
    .unwrap();
    assert!((est.value - TAU).abs() < 5e-3 * TAU, "{}", est.value);
    assert!(
        (est.value - TAU).abs() < 4.0 * est.stderr,
        "{} +- {}",
        est.value,
        est.stderr
    );
    // the error shrinks like 1/sqrt(lines)
    let small = crofton_length(
        &field,
        2.0,
        Sampler::Mc {
            n: 10_000,
            seed: 11,
        },
    )
    .unwrap();
    let ratio = small.stderr / est.stderr;
    assert!(ratio > 7.0 && ratio < 13.0, "{ratio}");
}

#[test]
fn deficiency_examples() {
    let grid = Sampler::Grid {
        n_theta: 200,
        n_rho: 200,
    };
    for n in 1..=4 {
        let d = deficiency_integral(&Polynomial::monomial(n), 0.01, 1.0, grid).unwrap();
        assert!(
            d.value.abs() <= 3.0 * d.stderr + 1e-12,
            "n={n}: {} +- {}",
            d.value,
            d.stderr
        );
    }
    let f: Polynomial = "2; 1,0; 0,0; 1,0".parse().unwrap();
    let d = deficiency_integral(&f, 0.01, 1.0, grid).unwrap();
    assert!(d.value > 3.0 * d.stderr, "{} +- {}", d.value, d.stderr);
    assert!(matches!(
        deficiency_integral(&f, 1.0, 0.5, grid),
        Err(CroftonError::BadWindow)
    ));
}

#[test]
fn lemma1_examples() {
    let grid = Sampler::Grid {
        n_theta: 300,
        n_rho: 300,
    };
    for (s, bound) in [("2; 1,0; 0,0; 1,0", 8.0), ("3; 0,0; 1,0; 0,0; 1,0", 12.0)] {
        let f: Polynomial = s.parse().unwrap();
        let r = lemma1_check(&f, 2.0, grid).unwrap();
        assert_eq!(r.bound, bound);
        assert!(r.passed(), "{s}: {r:?}");
        assert!(r.trace_length < bound && r.gap > 0.0);
        assert!((r.crofton.value - r.trace_length).abs() < 1e-2 * r.trace_length);
        assert!(r.circle_counts.iter().all(|&(_, c)| c >= 2 * f.degree()));
        let traced = realpart_curve_length(&f, 2.0).unwrap();
        assert_eq!(traced.length, r.trace_length);
    }
    let not_normalized: Polynomial = "2; 0.5,0; 0,0; 1,0".parse().unwrap();
    assert!(matches!(
        lemma1_check(&not_normalized, 2.0, grid),
        Err(CroftonError::NotNormalized(_))
    ));
}

#[test]
fn sturm_agrees_with_dense_sweep() {
    let w = 3.0;
    let mut checked = 0;
    for k in 0..200u64 {
        let mut rng = stream_rng(42, k);
        let n = rng.random_range(1..=6);
        let f = random_polynomial(n, 1.0, &mut rng);
        let line = LineCoord::new(rng.random_range(0.0..PI), rng.random_range(-1.5..1.5));
        for c in [realpart_along(&f, line), modulus_along(&f, line)] {
            let sweep = sweep_sign_changes(&c, w, 200_000);
            match real_root_count(&c, w) {
                Ok(count) => {
                    assert_eq!(count, sweep, "pair {k}: n={n}, line {line:?}");
                    checked += 1;
                }
                Err(CroftonError::Degenerate) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
    assert!(checked >= 390, "{checked}");
}

fn complex_in(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn counts_respect_degree(roots in prop::collection::vec(complex_in(1.0), 1..=6), theta in 0.0..PI, rho in -2.0..2.0f64) {
        let p = Polynomial::from_roots(&roots);
        let n = p.degree();
        let line = LineCoord::new(theta, rho);
        match line_count_realpart(&p, line, f64::INFINITY) {
            Ok(c) => prop_assert!(c <= n),
            Err(e) => prop_assert!(matches!(e, CroftonError::Degenerate)),
        }
        match line_count_modulus(&p, line, f64::INFINITY) {
            Ok(c) => prop_assert!(c <= 2 * n),
            Err(e) => prop_assert!(matches!(e, CroftonError::Degenerate)),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn deficiency_is_nonnegative(a in prop::collection::vec(complex_in(1.0), 0..=2), an in -1.0..1.0f64) {
        // f = z^n + a_2 z^{n-2} + ... + a_n, with a holding a_2..a_{n-1}
        let n = a.len() + 2;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        for (i, &ak) in a.iter().enumerate() {
            coeffs[n - (i + 2)] = ak;
        }
        coeffs[0] = Complex64::new(an, 0.0);
        let f = Polynomial::new(coeffs).unwrap();
        let d = deficiency_integral(&f, 0.25, 4.0, Sampler::Grid { n_theta: 60, n_rho: 60 }).unwrap();
        prop_assert!(d.value >= -3.0 * d.stderr);
    }
}
