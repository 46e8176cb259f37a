use std::f64::consts::{PI, TAU};

use lemniscate_core::quadrature::{
    length_area_v1_with, length_area_v2_with, singular_mass_chain, singular_points,
};
use lemniscate_core::{
    area_capacity_check, integrate_over_e, lemniscate_length_trace, length_area_v1, length_area_v2,
    pushforward_check, singular_mass, Complex64, Polynomial, QuadBudget, RegionE,
};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn bernoulli() -> f64 {
    let (mut a, mut b) = (1.0f64, 0.5f64.sqrt());
    for _ in 0..40 {
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    TAU / a
}

/// Area inside `r^2 = 2 cos 2 theta` by the polar formula, midpoint rule.
fn bernoulli_area() -> f64 {
    let m = 200_000;
    let h = (PI / 2.0) / m as f64;
    let lobe: f64 = (0..m)
        .map(|k| 0.5 * 2.0 * (2.0 * (-PI / 4.0 + (k as f64 + 0.5) * h)).cos() * h)
        .sum();
    2.0 * lobe
}

fn one(_: Complex64) -> Complex64 {
    c(1.0, 0.0)
}

#[test]
fn areas() {
    for n in 1..=5 {
        let p = Polynomial::monomial(n);
        let region = RegionE::new(&p).unwrap();
        let r = integrate_over_e(
            &region,
            &one,
            &singular_points(&p).unwrap(),
            &QuadBudget::default(),
        )
        .unwrap();
        assert!((r.value.re - PI).abs() < 1e-3, "n={n}: {}", r.value);
        assert!(r.cells_used >= 1 && r.error_estimate.is_finite());
    }
    let p = Polynomial::unit_roots(2);
    let area = area_capacity_check(&p).unwrap();
    let oracle = bernoulli_area();
    assert!((oracle - 2.0).abs() < 1e-9);
    assert!((area.area.value.re - oracle).abs() < 1e-2);
    assert!(!area.violation);

    let far: Polynomial = "2; -4,0; 0,0; 1,0".parse().unwrap();
    let area = area_capacity_check(&far).unwrap();
    assert!(
        rel(area.area.value.re, PI / 8.0) < 0.05,
        "{}",
        area.area.value
    );
    assert!(!area.violation);
}

#[test]
fn inverse_distance_over_disk() {
    let p = Polynomial::monomial(1);
    let region = RegionE::new(&p).unwrap();
    let f = |z: Complex64| c(1.0 / z.norm(), 0.0);
    let r = integrate_over_e(
        &region,
        &f,
        &singular_points(&p).unwrap(),
        &QuadBudget::default(),
    )
    .unwrap();
    assert!((r.value.re - TAU).abs() < 1e-3, "{}", r.value);
}

#[test]
fn lengths_of_known_curves() {
    for n in 1..=5 {
        let p = Polynomial::monomial(n);
        for v in [length_area_v1(&p).unwrap(), length_area_v2(&p).unwrap()] {
            assert!(rel(v.value.re, TAU) < 5e-3, "n={n}: {}", v.value);
        }
    }
    let p = Polynomial::unit_roots(2);
    let exact = bernoulli();
    for v in [length_area_v1(&p).unwrap(), length_area_v2(&p).unwrap()] {
        assert!(rel(v.value.re, exact) < 5e-3, "{} vs {exact}", v.value);
    }
}

#[test]
fn far_ovals_against_trace() {
    let p: Polynomial = "2; -4,0; 0,0; 1,0".parse().unwrap();
    let budget = QuadBudget {
        rel_tol: 1e-3,
        ..Default::default()
    };
    let v1 = length_area_v1_with(&p, &budget).unwrap();
    let traced = lemniscate_length_trace(&p).unwrap();
    let tol = 3.0 * (v1.error_estimate + traced.error_estimate) + 2e-3 * traced.total_length;
    assert!(
        (v1.value.re - traced.total_length).abs() <= tol,
        "{} vs {}",
        v1.value,
        traced.total_length
    );
}

#[test]
fn pushforward_instances() {
    let cases: [(&str, f64); 3] = [
        ("2; -1,0; 0,0; 1,0", TAU),
        ("3; 0,0; 0.1,0; 0,0; 1,0", 3.0 * PI),
        ("4; 0,0; 0,0; 0,0; 0,0; 1,0", 4.0 * PI),
    ];
    for (s, expected) in cases {
        let p: Polynomial = s.parse().unwrap();
        let r = pushforward_check(&p).unwrap();
        assert!(
            rel(r.squared.value.re, expected) < 1e-2,
            "{s}: {}",
            r.squared.value
        );
        assert!(r.identity_holds && r.cauchy_holds);
        assert!(r.absolute.value.re <= PI * (p.degree() as f64).sqrt() * 1.01);
    }
}

#[test]
fn singular_mass_examples() {
    for n in 1..=4 {
        let p = Polynomial::monomial(n);
        let m = singular_mass(&RegionE::new(&p).unwrap()).unwrap();
        let expected = TAU * (2 * n - 1) as f64;
        assert!(rel(m.value.re, expected) < 1e-2, "n={n}: {}", m.value);
    }
    let p = Polynomial::unit_roots(2);
    let m = singular_mass(&RegionE::new(&p).unwrap()).unwrap();
    let traced = lemniscate_length_trace(&p).unwrap();
    assert!(m.value.re >= bernoulli());
    let chain = singular_mass_chain(2, traced.total_length, traced.error_estimate, &m, 1e-2);
    assert!(chain.length_below_mass && chain.mass_below_bound);
}

fn complex_in(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn area_formulas_agree(roots in prop::collection::vec(complex_in(0.35), 4)) {
        let p = Polynomial::from_roots(&roots);
        let budget = QuadBudget::default();
        let v1 = length_area_v1_with(&p, &budget).unwrap();
        let v2 = length_area_v2_with(&p, &budget).unwrap();
        let tol = 3.0 * (v1.error_estimate + v2.error_estimate) + 5e-3 * v1.value.re;
        prop_assert!((v1.value.re - v2.value.re).abs() <= tol, "{} vs {}", v1.value, v2.value);
        prop_assert!(v1.value.im.abs() <= 3.0 * v1.error_estimate + 1e-9, "im {} err {}", v1.value.im, v1.error_estimate);
    }

    #[test]
    fn area_below_capacity_bound(roots in prop::collection::vec(complex_in(0.35), 2..=6)) {
        let p = Polynomial::from_roots(&roots);
        let a = area_capacity_check(&p).unwrap();
        prop_assert!(a.area.value.re <= PI * 1.01);
        let pf = pushforward_check(&p).unwrap();
        prop_assert!(pf.identity_holds, "{} vs {}", pf.squared.value, pf.expected_squared);
    }
}
