use std::f64::consts::{PI, TAU};

use lemniscate_core::quadrature::length_area_v1_with;
use lemniscate_core::tracer::{modulus_residual, realpart_residual};
use lemniscate_core::{
    crofton_lemniscate_length, crofton_length, lemniscate_length_trace,
    lemniscate_length_trace_with, realpart_curve_length, roots_of, seed_points, trace_component,
    Complex64, CountField, Polynomial, QuadBudget, Sampler, TraceControl,
};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn area_length(p: &Polynomial) -> f64 {
    let budget = QuadBudget {
        rel_tol: 1e-3,
        ..Default::default()
    };
    length_area_v1_with(p, &budget).unwrap().value.re
}

fn agm_bernoulli() -> f64 {
    let (mut a, mut b) = (1.0f64, 0.5f64.sqrt());
    for _ in 0..40 {
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    TAU / a
}

#[test]
fn seeds_on_the_real_axis() {
    let p = Polynomial::unit_roots(2);
    let seeds = seed_points(&p, &roots_of(&p).unwrap()).unwrap();
    let s2 = 2f64.sqrt();
    assert!(seeds.iter().any(|s| (s - c(s2, 0.0)).norm() < 1e-12));
    assert!(seeds.iter().any(|s| (s - c(-s2, 0.0)).norm() < 1e-12));
    for s in seeds {
        assert!(modulus_residual(&p, s) < 1e-12);
    }
}

#[test]
fn monomial_is_one_unit_circle() {
    for n in 1..=8 {
        let lem = lemniscate_length_trace(&Polynomial::monomial(n)).unwrap();
        assert_eq!(lem.components.len(), 1);
        assert!(
            (lem.total_length - TAU).abs() <= 1e-6,
            "n={n}: {}",
            lem.total_length
        );
        assert!(!lem.singular);
    }
}

#[test]
fn bernoulli_against_agm() {
    let lem = lemniscate_length_trace(&Polynomial::unit_roots(2)).unwrap();
    assert!(lem.singular);
    assert_eq!(lem.singular_points.len(), 1);
    assert!(lem.singular_points[0].norm() < 1e-9);
    let exact = agm_bernoulli();
    assert!(
        (lem.total_length - exact).abs() < 1e-5,
        "{} vs {exact}",
        lem.total_length
    );
}

#[test]
fn far_ovals_match_area_method() {
    let p: Polynomial = "2; -4,0; 0,0; 1,0".parse().unwrap();
    let lem = lemniscate_length_trace(&p).unwrap();
    assert_eq!(lem.components.len(), 2);
    let approx = PI;
    assert!((lem.total_length - approx).abs() < 0.05 * approx);
    let area = area_length(&p);
    assert!(
        (lem.total_length - area).abs() < 2e-3 * area,
        "{} vs {area}",
        lem.total_length
    );
    for comp in &lem.components {
        let mid = comp.vertices.iter().sum::<Complex64>() / comp.vertices.len() as f64;
        assert!((mid.re.abs() - 2.0).abs() < 0.05 && mid.im.abs() < 1e-6);
    }
}

#[test]
fn hyperbola_against_crofton() {
    let f: Polynomial = "2; 1,0; 0,0; 1,0".parse().unwrap();
    let traced = realpart_curve_length(&f, 2.0).unwrap();
    let field = CountField::RealPart(f.clone());
    let est = crofton_length(
        &field,
        2.0,
        Sampler::Grid {
            n_theta: 400,
            n_rho: 400,
        },
    )
    .unwrap();
    assert!(
        (traced.length - est.value).abs() < 1e-2 * traced.length,
        "{} vs {}",
        traced.length,
        est.value
    );
    for comp in &traced.components {
        for &v in &comp.vertices {
            assert!(realpart_residual(&f, v) <= comp.on_curve_tol);
            assert!(v.norm() <= 2.0 + 1e-12);
        }
    }
}

// Two cubics whose lemniscates pass within 1e-6 of a node. Earlier tracer
// versions hopped between branches here and reported lengths in the hundreds.
#[test]
fn near_node_cubics() {
    let cases = [
        "3; 0.9240146991423479,0.0; -0.49779505054348183,-0.8622063325117653; 0.0,0.0; 1.0,0.0",
        "3; 0.9240141647297444,0.0; -0.4977961853059262,-0.8622082847637567; 0.0,0.0; 1.0,0.0",
    ];
    for s in cases {
        let p: Polynomial = s.parse().unwrap();
        let lem = lemniscate_length_trace(&p).unwrap();
        let area = area_length(&p);
        let cr = crofton_lemniscate_length(
            &p,
            Sampler::Grid {
                n_theta: 300,
                n_rho: 300,
            },
        )
        .unwrap();
        assert!(
            (lem.total_length - area).abs() < 2e-3 * area,
            "{s}: trace {} area {area}",
            lem.total_length
        );
        assert!(
            (lem.total_length - cr.value).abs() < 1e-2 * cr.value,
            "{s}: trace {} crofton {}",
            lem.total_length,
            cr.value
        );
        assert!(lem.total_length > 8.2 && lem.total_length < 8.3);
    }
}

fn complex_in(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

/// `min over critical points of ||p(zeta)| - 1|`.
fn critical_margin(p: &Polynomial) -> f64 {
    match p.monic_derivative() {
        None => f64::INFINITY,
        Some(d) => roots_of(&d)
            .unwrap()
            .locations()
            .iter()
            .map(|z| (p.eval(*z).norm() - 1.0).abs())
            .fold(f64::INFINITY, f64::min),
    }
}

/// Components of `{|p| < 1}` on a square grid, 4-connected.
fn flood_fill_components(p: &Polynomial, half: f64, m: usize) -> usize {
    let step = 2.0 * half / m as f64;
    let inside: Vec<bool> = (0..m * m)
        .map(|k| {
            let (i, j) = (k % m, k / m);
            let z = c(
                -half + (i as f64 + 0.5) * step,
                -half + (j as f64 + 0.5) * step,
            );
            p.eval(z).norm() < 1.0
        })
        .collect();
    let mut seen = vec![false; m * m];
    let mut count = 0;
    for start in 0..m * m {
        if !inside[start] || seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(k) = stack.pop() {
            let (i, j) = (k % m, k / m);
            let mut push = |ni: usize, nj: usize| {
                let q = nj * m + ni;
                if inside[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < m {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < m {
                push(i, j + 1);
            }
        }
    }
    count
}

fn nonsingular() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(complex_in(1.0), 2..=4)
        .prop_map(|roots| Polynomial::from_roots(&roots))
        .prop_filter("critical value too close to 1", |p| {
            critical_margin(p) >= 0.05
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vertices_on_curve_and_lengths_consistent(p in nonsingular()) {
        let lem = lemniscate_length_trace(&p).unwrap();
        let mut total = 0.0;
        for comp in &lem.components {
            prop_assert!(comp.closed);
            for &v in &comp.vertices {
                prop_assert!(modulus_residual(&p, v) <= comp.on_curve_tol);
            }
            prop_assert!((comp.polyline_length() - comp.length).abs() <= 1e-12 * comp.length);
            total += comp.length;
        }
        prop_assert!((total - lem.total_length).abs() <= 1e-12 * total);
    }

    #[test]
    fn halving_the_step(p in nonsingular()) {
        let base = TraceControl::default();
        let coarse = lemniscate_length_trace_with(&p, &base).unwrap();
        let fine = lemniscate_length_trace_with(&p, &base.clone().with_base_step(base.base_step / 2.0)).unwrap();
        let diff = (coarse.total_length - fine.total_length).abs();
        prop_assert!(diff <= 4.0 * coarse.error_estimate.max(1e-12 * coarse.total_length),
            "diff {diff:e} est {:e}", coarse.error_estimate);
    }

    #[test]
    fn reversal_keeps_length(p in nonsingular()) {
        let lem = lemniscate_length_trace(&p).unwrap();
        for comp in &lem.components {
            let rev = comp.reversed();
            prop_assert!((rev.polyline_length() - comp.polyline_length()).abs() <= 1e-12 * comp.length);
            prop_assert!((rev.length - comp.length).abs() <= 1e-12 * comp.length);
        }
    }

    #[test]
    fn component_count_matches_flood_fill(p in nonsingular()) {
        let lem = lemniscate_length_trace(&p).unwrap();
        prop_assert_eq!(lem.components.len(), flood_fill_components(&p, 2.5, 700));
    }
}

#[test]
fn single_component_trace_from_seed() {
    let p: Polynomial = "2; -0.5,0; 0,0; 1,0".parse().unwrap();
    let seed = c(1.5f64.sqrt(), 0.0);
    let comp = trace_component(&p, seed, &TraceControl::default()).unwrap();
    assert!(comp.closed);
    let lem = lemniscate_length_trace(&p).unwrap();
    assert_eq!(lem.components.len(), 1);
    assert_eq!(flood_fill_components(&p, 2.0, 400), 1);
    assert!((comp.length - lem.total_length).abs() < 1e-9 * comp.length);
}
