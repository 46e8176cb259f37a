//! The core acceptance suite: twelve numbered criteria, each returning a
//! pass flag and a one-line summary.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::crofton::{deficiency_integral, lemma1_check, CroftonError, Sampler};
use crate::experiments::{
    bernoulli_length, bounds_report, extremal_search, linear_oscillation_case,
    local_max_experiment, measure, random_oscillation_case, random_polynomial, stream_rng,
    ExperimentError, LengthBudget, Method, OscillationCase, SearchBudget,
};
use crate::poly::Polynomial;
use crate::quadrature::{
    area_capacity_check_with, pushforward_check_with, singular_mass_chain, singular_mass_with,
    QuadBudget, RegionE,
};
use crate::report::Bounds;
use crate::roots::critical_points;
use crate::tracer::{lemniscate_length_trace, TraceControl};

/// Published value of the Bernoulli lemniscate length for `z^2 - 1`.
pub const BERNOULLI_LENGTH: f64 = 7.416298709205487;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {}: {} ({:.1}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_s
        )
    }
}

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "monomials z^n have length 2 pi"),
    (2, "z^2 - 1 has the Bernoulli length"),
    (3, "int_E |p'|^2 = pi n"),
    (4, "area of E at most pi"),
    (5, "length bounds"),
    (6, "methods agree"),
    (7, "real-part curves in disks"),
    (8, "oscillatory integral estimate"),
    (9, "z^n - 1 is a local maximum"),
    (10, "degree-2 extremal search"),
    (11, "length of z^n - 1 against 2n"),
    (12, "seeded runs reproduce"),
];

/// Runs criterion `id` (1 to 12) with the given seed.
pub fn run_criterion(id: u32, seed: u64) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => monomials(),
        2 => bernoulli(),
        3 => pushforward(seed),
        4 => area(seed),
        5 => length_bounds(seed),
        6 => agreement(seed),
        7 => realpart_disks(seed),
        8 => oscillation(seed),
        9 => local_max(seed),
        10 => search(seed),
        11 => growth(),
        12 => reproducibility(seed),
        _ => Err(format!("no criterion {id}")),
    };
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map_or("unknown", |c| c.1)
        .to_string();
    let (pass, detail) = match outcome {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        pass,
        detail,
        elapsed_s: start.elapsed().as_secs_f64(),
    }
}

pub fn run_suite(seed: u64) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, seed))
        .collect()
}

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = Result<Outcome, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Sample shared by criteria 3 to 5: 50 monic polynomials, degrees cycling
/// through 2..=6, roots uniform in `D_{1/2}`.
pub fn core_sample(seed: u64) -> Vec<Polynomial> {
    (0..50)
        .map(|i| random_polynomial(2 + i % 5, 0.5, &mut stream_rng(seed, i as u64)))
        .collect()
}

/// Smallest `||p(zeta)| - 1|` over critical points `zeta`.
pub fn critical_margin(p: &Polynomial) -> f64 {
    critical_points(p)
        .map(|c| {
            c.roots
                .iter()
                .map(|r| (p.eval(r.location).norm() - 1.0).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .unwrap_or(0.0)
}

fn monomials() -> Check {
    let start = Instant::now();
    let budget = LengthBudget::default();
    let mut worst = [0.0f64; 4];
    let mut pass = true;
    for n in 1..=6 {
        let p = Polynomial::monomial(n);
        for (i, m) in Method::ALL.into_iter().enumerate() {
            let v = measure(&p, m, &budget).map_err(err)?;
            let r = rel(v.value, TAU);
            worst[i] = worst[i].max(r);
            let tol = match m {
                Method::Trace => 1e-6,
                Method::Area1 | Method::Area2 => 5e-3,
                Method::Crofton => 1e-2,
            };
            pass &= r <= tol;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: pass && secs <= 30.0,
        detail: format!(
            "max rel err trace {:.1e}, area1 {:.1e}, area2 {:.1e}, crofton {:.1e} at {} lines",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            budget.sampler.lines()
        ),
    })
}

fn bernoulli() -> Check {
    let start = Instant::now();
    let oracle = bernoulli_length();
    let p = Polynomial::unit_roots(2);
    let budget = LengthBudget::default();
    let mut pass = rel(oracle, BERNOULLI_LENGTH) <= 1e-12;
    let mut parts = Vec::new();
    for m in Method::ALL {
        let v = measure(&p, m, &budget).map_err(err)?;
        let r = rel(v.value, oracle);
        pass &= r <= 5e-3;
        parts.push(format!("{} {:.5}", m.name(), v.value));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: pass && secs <= 60.0,
        detail: format!("oracle {oracle:.5}; {}", parts.join(", ")),
    })
}

fn pushforward(seed: u64) -> Check {
    let budget = QuadBudget::default();
    let mut worst = 0.0f64;
    let mut pass = true;
    for p in core_sample(seed) {
        let r = pushforward_check_with(&p, &budget, 1e-2).map_err(err)?;
        worst = worst.max(rel(r.squared.value.re, r.expected_squared));
        pass &= r.identity_holds && r.cauchy_holds;
    }
    Ok(Outcome {
        pass,
        detail: format!("50 polynomials, max rel deviation from pi n {worst:.1e}"),
    })
}

fn area(seed: u64) -> Check {
    let budget = QuadBudget::default();
    let mut largest = 0.0f64;
    let mut pass = true;
    for p in core_sample(seed) {
        let a = area_capacity_check_with(&p, &budget)
            .map_err(err)?
            .area
            .value
            .re;
        largest = largest.max(a);
        pass &= a <= PI * (1.0 + 1e-2);
    }
    let mut worst_eq = 0.0f64;
    for n in 1..=6 {
        let a = area_capacity_check_with(&Polynomial::monomial(n), &budget)
            .map_err(err)?
            .area
            .value
            .re;
        worst_eq = worst_eq.max(rel(a, PI));
    }
    pass &= worst_eq <= 1e-2;
    Ok(Outcome {
        pass,
        detail: format!(
            "max A(E)/pi {:.4}; z^n max rel deviation {worst_eq:.1e}",
            largest / PI
        ),
    })
}

fn length_bounds(seed: u64) -> Check {
    let budget = LengthBudget::default();
    let mut pass = true;
    let mut max_ratio = 0.0f64;
    let mut chain_ok = true;
    for p in core_sample(seed) {
        let report = bounds_report(&p, &[Method::Trace], &budget).map_err(err)?;
        pass &= report.passed();
        let t = report.methods["trace"];
        max_ratio = max_ratio.max(t.value / report.bounds.b2);
        let region = RegionE::new(&p).map_err(err)?;
        let mass = singular_mass_with(&region, &budget.quad).map_err(err)?;
        let chain = singular_mass_chain(p.degree(), t.value, t.err, &mass, 1e-2);
        chain_ok &= chain.length_below_mass && chain.mass_below_bound;
    }
    let mut tight = 0.0f64;
    for n in 1..=6 {
        let l = lemniscate_length_trace(&Polynomial::monomial(n)).map_err(err)?;
        tight = tight.max(rel(l.total_length, Bounds::distinct_roots(1)));
    }
    Ok(Outcome {
        pass: pass && chain_ok && tight <= 5e-3,
        detail: format!(
            "max |L|/b2 {max_ratio:.3}; mass chain {}; z^n against 2 pi (2k - 1) rel {tight:.1e}",
            if chain_ok { "holds" } else { "broken" }
        ),
    })
}

/// 20 random polynomials with every critical value at least `1e-3` away from
/// the unit circle.
pub fn nonsingular_sample(seed: u64) -> Vec<Polynomial> {
    let mut out = Vec::new();
    let mut i = 0u64;
    while out.len() < 20 {
        let p = random_polynomial(
            2 + (i as usize) % 5,
            0.5,
            &mut stream_rng(seed ^ 0x6e6f6e73, i),
        );
        i += 1;
        if critical_margin(&p) >= 1e-3 {
            out.push(p);
        }
    }
    out
}

fn agreement(seed: u64) -> Check {
    let budget = LengthBudget {
        sampler: Sampler::Grid {
            n_theta: 500,
            n_rho: 500,
        },
        ..Default::default()
    };
    let mut worst_det = 0.0f64;
    let mut worst_crofton = 0.0f64;
    for p in nonsingular_sample(seed) {
        let v: Vec<f64> = Method::ALL
            .into_iter()
            .map(|m| measure(&p, m, &budget).map(|v| v.value))
            .collect::<Result<_, ExperimentError>>()
            .map_err(err)?;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let r = rel(v[i], v[j]);
                if j == 3 {
                    worst_crofton = worst_crofton.max(r);
                } else {
                    worst_det = worst_det.max(r);
                }
            }
        }
    }
    Ok(Outcome {
        pass: worst_det <= 5e-3 && worst_crofton <= 1e-2,
        detail: format!(
            "max pairwise rel gap: trace/area {worst_det:.1e}, with crofton {worst_crofton:.1e}"
        ),
    })
}

/// `z^n + a_2 z^{n-2} + ... + a_n` with `max |a_k| = 1` and `a_n` real.
pub fn normalized_sample(seed: u64, count: usize) -> Vec<Polynomial> {
    (0..count)
        .map(|i| {
            let mut rng = stream_rng(seed ^ 0x6c656d31, i as u64);
            let n = 2 + i % 5;
            let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
            c[n] = Complex64::new(1.0, 0.0);
            for k in 2..n {
                c[n - k] = crate::experiments::uniform_disk(&mut rng, 1.0);
            }
            c[0] = Complex64::new(2.0 * rng.random::<f64>() - 1.0, 0.0);
            let m = c[..n].iter().fold(0.0f64, |m, v| m.max(v.norm()));
            for v in &mut c[..n] {
                *v /= m;
            }
            Polynomial::new(c).expect("monic")
        })
        .collect()
}

fn realpart_disks(seed: u64) -> Check {
    let sampler = Sampler::Grid {
        n_theta: 300,
        n_rho: 300,
    };
    let mut pass = true;
    let mut min_gap = f64::INFINITY;
    let mut strict = 0usize;
    let mut min_def = f64::INFINITY;
    for f in normalized_sample(seed, 20) {
        let r = lemma1_check(&f, 2.0, sampler).map_err(err)?;
        pass &= r.passed();
        min_gap = min_gap.min(r.gap);
        let d = match deficiency_integral(
            &f,
            0.25,
            4.0,
            Sampler::Grid {
                n_theta: 200,
                n_rho: 200,
            },
        ) {
            Ok(d) => d,
            Err(CroftonError::NegativeDeficiency { .. }) => {
                pass = false;
                continue;
            }
            Err(e) => return Err(err(e)),
        };
        pass &= d.value >= -3.0 * d.stderr;
        min_def = min_def.min(d.value);
        strict += (d.value > 3.0 * d.stderr) as usize;
    }
    pass &= strict >= 1;
    Ok(Outcome {
        pass,
        detail: format!("20 polynomials; min gap to 2nr {min_gap:.3}; min deficiency {min_def:.3}; strictly positive {strict}"),
    })
}

fn oscillation(seed: u64) -> Check {
    let mut pass = true;
    let mut worst_ratio = 0.0f64;
    for i in 0..100 {
        let case = random_oscillation_case(seed, i);
        let r = case.check();
        pass &= r.pass;
        worst_ratio = worst_ratio.max(r.integral_abs / r.bound);
        if i < 10 {
            let half =
                OscillationCase::new(case.g.clone(), case.center, 0.5 * case.side).map_err(err)?;
            pass &= half.check().pass;
        }
    }
    let mut worst_closed = 0.0f64;
    for r in [0.5, 1.0, 2.5, 7.0, 31.0] {
        let case = linear_oscillation_case(r);
        let exact = (Complex64::new(0.0, 2.0 * r).exp() - 1.0).norm() / (2.0 * r);
        worst_closed = worst_closed.max((case.integral().norm() - exact).abs());
        pass &= case.check().pass;
    }
    pass &= worst_closed <= 1e-8;
    Ok(Outcome {
        pass,
        detail: format!(
            "100 cases, max |I|/bound {worst_ratio:.3}; closed form err {worst_closed:.1e}"
        ),
    })
}

fn local_max(seed: u64) -> Check {
    let start = Instant::now();
    let ctrl = TraceControl::default();
    let mut pass = true;
    let mut min_deficit = f64::INFINITY;
    let mut violations = 0u64;
    for n in 2..=5 {
        for a in [0.01, 0.02, 0.05] {
            let r = local_max_experiment(n, a, 200, seed, &ctrl).map_err(err)?;
            pass &= r.passed();
            violations += r.data["violations"].as_u64().unwrap_or(u64::MAX);
            min_deficit = min_deficit.min(r.data["deficit"]["min"].as_f64().unwrap_or(f64::NAN));
        }
        let zero = local_max_experiment(n, 0.0, 5, seed, &ctrl).map_err(err)?;
        pass &= zero.passed();
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: pass && secs <= 300.0,
        detail: format!("2400 trials, {violations} violations, min deficit {min_deficit:.2e}"),
    })
}

fn search(seed: u64) -> Check {
    let r =
        extremal_search(2, SearchBudget::default(), seed, &TraceControl::default()).map_err(err)?;
    let l = r.methods["trace"].value;
    Ok(Outcome {
        pass: r.passed(),
        detail: format!(
            "best {} at distance {:.1e}, length {l:.6}",
            r.polynomial,
            r.data["distance"].as_f64().unwrap_or(f64::NAN)
        ),
    })
}

/// `(n, |L_{z^n - 1}| - 2n, error)` for `n = 2..=16`.
pub fn excess_over_2n() -> Result<Vec<(usize, f64, f64)>, String> {
    (2..=16)
        .map(|n| {
            let l = lemniscate_length_trace(&Polynomial::unit_roots(n)).map_err(err)?;
            Ok((n, l.total_length - 2.0 * n as f64, l.error_estimate))
        })
        .collect()
}

fn growth() -> Check {
    let rows = excess_over_2n()?;
    let nonneg = rows.iter().all(|&(_, d, e)| d + 3.0 * e >= 0.0);
    let monotone = rows
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + 3.0 * (w[0].2 + w[1].2));
    let bounded = rows.iter().all(|&(_, d, _)| d <= rows[0].1 + 1e-9);
    let list: Vec<String> = rows.iter().map(|(n, d, _)| format!("{n}:{d:.3}")).collect();
    Ok(Outcome {
        pass: nonneg && monotone && bounded,
        detail: format!(
            "{}; nonneg {nonneg}, nonincreasing {monotone}, bounded {bounded}",
            list.join(" ")
        ),
    })
}

fn reproducibility(seed: u64) -> Check {
    let p = random_polynomial(4, 0.5, &mut stream_rng(seed, 999));
    let budget = LengthBudget {
        sampler: Sampler::Mc { n: 20_000, seed },
        ..Default::default()
    };
    let run = |threads: usize| -> Result<Vec<String>, String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(err)?;
        pool.install(|| {
            let a = bounds_report(&p, &Method::ALL, &budget).map_err(err)?;
            let b =
                local_max_experiment(3, 0.02, 20, seed, &TraceControl::default()).map_err(err)?;
            Ok(vec![a.to_json_without_timing(), b.to_json_without_timing()])
        })
    };
    let first = run(1)?;
    let second = run(1)?;
    let parallel = run(4)?;
    let pass = first == second && first == parallel;
    Ok(Outcome {
        pass,
        detail: format!("reports identical across reruns and thread counts: {pass}"),
    })
}
