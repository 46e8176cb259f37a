//! Bound checks, perturbation studies around `z^n - 1`, extremal search and
//! the oscillatory-integral estimate.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::crofton::{crofton_lemniscate_length, CroftonError, Sampler};
use crate::gauss::GaussRule;
use crate::poly::{perturbed_family, PolyError, Polynomial};
use crate::quadrature::{length_area_v1_with, length_area_v2_with, QuadBudget, QuadError};
use crate::report::{Assertion, Bounds, ExperimentReport, Meta, MethodValue};
use crate::roots::roots_of;
use crate::tracer::{lemniscate_length_trace_with, TraceControl, TraceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("trace: {0}")]
    Trace(#[from] TraceError),
    #[error("quadrature: {0}")]
    Quad(#[from] QuadError),
    #[error("crofton: {0}")]
    Crofton(#[from] CroftonError),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("trial {trial} ({polynomial}): {message}")]
    Trial {
        trial: usize,
        polynomial: String,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Trace,
    Area1,
    Area2,
    Crofton,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Trace, Method::Area1, Method::Area2, Method::Crofton];

    pub fn name(self) -> &'static str {
        match self {
            Method::Trace => "trace",
            Method::Area1 => "area1",
            Method::Area2 => "area2",
            Method::Crofton => "crofton",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Resolution settings shared by every length method.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LengthBudget {
    pub trace: TraceControl,
    pub quad: QuadBudget,
    pub sampler: Sampler,
}

impl LengthBudget {
    pub fn describe(&self) -> String {
        format!(
            "trace:h={};quad:cells={},rel={:e};crofton:{}",
            self.trace.base_step, self.quad.max_cells, self.quad.rel_tol, self.sampler
        )
    }

    fn seed(&self) -> u64 {
        match self.sampler {
            Sampler::Mc { seed, .. } => seed,
            Sampler::Grid { .. } => 0,
        }
    }
}

pub fn measure(
    p: &Polynomial,
    method: Method,
    budget: &LengthBudget,
) -> Result<MethodValue, ExperimentError> {
    Ok(match method {
        Method::Trace => {
            let l = lemniscate_length_trace_with(p, &budget.trace)?;
            MethodValue {
                value: l.total_length,
                err: l.error_estimate,
            }
        }
        Method::Area1 => {
            let r = length_area_v1_with(p, &budget.quad)?;
            MethodValue {
                value: r.value.re,
                err: r.error_estimate,
            }
        }
        Method::Area2 => {
            let r = length_area_v2_with(p, &budget.quad)?;
            MethodValue {
                value: r.value.re,
                err: r.error_estimate,
            }
        }
        Method::Crofton => {
            let r = crofton_lemniscate_length(p, budget.sampler)?;
            MethodValue {
                value: r.value,
                err: r.stderr,
            }
        }
    })
}

/// Number of distinct roots, merging clusters the root finder reports as one.
pub fn distinct_roots(p: &Polynomial) -> Result<usize, ExperimentError> {
    Ok(roots_of(p)
        .map_err(|e| ExperimentError::Quad(QuadError::Roots(e)))?
        .roots
        .len())
}

/// Measures `|L_p|` by the requested methods and checks every upper bound
/// against each measurement less three error estimates.
pub fn bounds_report(
    p: &Polynomial,
    methods: &[Method],
    budget: &LengthBudget,
) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    let n = p.degree();
    let bounds = Bounds::for_degree(n);
    let k = distinct_roots(p)?;
    let refined = Bounds::distinct_roots(k);

    let mut values = BTreeMap::new();
    for &m in methods {
        values.insert(m.name().to_string(), measure(p, m, budget)?);
    }

    let mut asserts = Vec::new();
    for (name, v) in &values {
        let low = v.value - 3.0 * v.err;
        asserts.push(Assertion::le(
            format!("{name} - 3err <= b1"),
            low,
            bounds.b1,
        ));
        asserts.push(Assertion::le(
            format!("{name} - 3err <= b2"),
            low,
            bounds.b2,
        ));
        asserts.push(Assertion::le(
            format!("{name} - 3err <= danchenko"),
            low,
            bounds.danchenko,
        ));
        asserts.push(Assertion::le(
            format!("{name} - 3err <= refined"),
            low,
            refined,
        ));
    }

    let mut data = json!({ "degree": n, "distinct_roots": k, "refined": refined });
    if let Some(t) = values.get("trace") {
        data["length_minus_2n"] = json!(t.value - bounds.ref2n);
    }

    Ok(ExperimentReport {
        polynomial: p.to_string(),
        methods: values,
        bounds,
        asserts,
        meta: Meta {
            seed: budget.seed(),
            budget: budget.describe(),
            elapsed_s: start.elapsed().as_secs_f64(),
        },
        data,
    })
}

/// Random stream for item `index` of a seeded run.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point of the closed disk of the given radius.
pub fn uniform_disk(rng: &mut impl Rng, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, TAU * rng.random::<f64>())
}

/// Monic polynomial of degree `n` with roots uniform in `D_radius`.
pub fn random_polynomial(n: usize, radius: f64, rng: &mut impl Rng) -> Polynomial {
    let roots: Vec<Complex64> = (0..n).map(|_| uniform_disk(rng, radius)).collect();
    Polynomial::from_roots(&roots)
}

/// Coefficients `a_2..a_n` with `|a_k| <= a^k` and `a_n` real.
pub fn sample_perturbation(n: usize, a: f64, rng: &mut impl Rng) -> Vec<Complex64> {
    (2..=n)
        .map(|k| {
            let r = a.powi(k as i32);
            if k == n {
                Complex64::new(r * (2.0 * rng.random::<f64>() - 1.0), 0.0)
            } else {
                uniform_disk(rng, r)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub coefficients: Vec<Complex64>,
    pub length: f64,
    pub err: f64,
    pub deficit: f64,
    pub eps: f64,
}

/// Samples `trials` perturbations `p = z^n - 1 + sum a_k z^{n-k}` of size `a`
/// and checks `|L_p| <= |L_{p0}| + 3 (err_p + err_{p0})` for each.
pub fn local_max_experiment(
    n: usize,
    a: f64,
    trials: usize,
    seed: u64,
    ctrl: &TraceControl,
) -> Result<ExperimentReport, ExperimentError> {
    if n < 2 {
        return Err(ExperimentError::BadParameter(
            "degree must be at least 2".into(),
        ));
    }
    if !(0.0..=0.05).contains(&a) {
        return Err(ExperimentError::BadParameter(format!(
            "perturbation size {a} outside [0, 0.05]"
        )));
    }
    if trials == 0 {
        return Err(ExperimentError::BadParameter(
            "need at least one trial".into(),
        ));
    }
    let start = Instant::now();
    let p0 = Polynomial::unit_roots(n);
    let base = lemniscate_length_trace_with(&p0, ctrl)?;

    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let coefficients = sample_perturbation(n, a, &mut stream_rng(seed, trial as u64));
            let p = perturbed_family(n, &coefficients)?;
            let l = lemniscate_length_trace_with(&p, ctrl).map_err(|e| ExperimentError::Trial {
                trial,
                polynomial: p.to_string(),
                message: e.to_string(),
            })?;
            Ok(TrialRecord {
                trial,
                coefficients,
                length: l.total_length,
                err: l.error_estimate,
                deficit: base.total_length - l.total_length,
                eps: 3.0 * (l.error_estimate + base.error_estimate),
            })
        })
        .collect::<Result<_, ExperimentError>>()?;

    let mut deficits: Vec<f64> = records.iter().map(|r| r.deficit).collect();
    deficits.sort_by(f64::total_cmp);
    let median = if trials % 2 == 1 {
        deficits[trials / 2]
    } else {
        0.5 * (deficits[trials / 2 - 1] + deficits[trials / 2])
    };
    let violations: Vec<&TrialRecord> = records.iter().filter(|r| -r.deficit > r.eps).collect();

    let mut asserts = vec![Assertion::le(
        "violations <= 0",
        violations.len() as f64,
        0.0,
    )];
    if a == 0.0 {
        let worst = deficits.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        asserts.push(Assertion::le("max |deficit| <= 0 at a = 0", worst, 0.0));
    }
    if a >= 0.02 {
        asserts.push(Assertion::lt("0 < median deficit", 0.0, median));
    }

    let mut methods = BTreeMap::new();
    methods.insert(
        "trace".to_string(),
        MethodValue {
            value: base.total_length,
            err: base.error_estimate,
        },
    );
    let data = json!({
        "degree": n,
        "a": a,
        "trials": trials,
        "violations": violations.len(),
        "deficit": {
            "min": deficits[0],
            "median": median,
            "max": deficits[trials - 1],
            "mean": deficits.iter().sum::<f64>() / trials as f64,
        },
        "median_deficit_over_a": if a > 0.0 { median / a } else { 0.0 },
        "failures": violations,
    });

    Ok(ExperimentReport {
        polynomial: p0.to_string(),
        methods,
        bounds: Bounds::for_degree(n),
        asserts,
        meta: Meta {
            seed,
            budget: format!("trace:h={};trials={trials}", ctrl.base_step),
            elapsed_s: start.elapsed().as_secs_f64(),
        },
        data,
    })
}

/// Minimizes `f` from `x0` by the downhill simplex method.
pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    tol: f64,
) -> (Vec<f64>, f64, usize) {
    let d = x0.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };

    while evals.get() < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[d].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= tol && size <= tol.sqrt() {
            break;
        }
        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / d as f64;
            }
        }
        let worst = simplex[d].clone();
        let xr = combine(&centroid, &worst.0, -1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = combine(&centroid, &worst.0, -2.0);
            let fe = eval(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = combine(&centroid, &xr, 0.5);
                let v = eval(&x);
                (x, v)
            } else {
                let x = combine(&centroid, &worst.0, 0.5);
                let v = eval(&x);
                (x, v)
            };
            if fc < worst.1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &entry.0, 0.5);
                    let v = eval(&x);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, v, evals.get())
}

/// `z^n + sum_{k=2}^n a_k z^{n-k}` from `2(n-2) + 1` reals: complex `a_2..a_{n-1}`, then real `a_n`.
pub fn normalized_from_params(n: usize, x: &[f64]) -> Polynomial {
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    for k in 2..n {
        c[n - k] = Complex64::new(x[2 * (k - 2)], x[2 * (k - 2) + 1]);
    }
    c[0] = Complex64::new(x[2 * (n - 2)], 0.0);
    Polynomial::new(c).expect("monic by construction")
}

/// Coefficient distance from a normalized `p` to the orbit of `z^n - 1`
/// under rotations and conjugation: `sqrt(sum_{k<n} |a_k|^2 + (|a_n| - 1)^2)`.
pub fn distance_to_extremal(p: &Polynomial) -> f64 {
    let n = p.degree();
    let c = p.coeffs();
    let middle: f64 = c[1..n].iter().map(|a| a.norm_sqr()).sum();
    (middle + (c[0].norm() - 1.0).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBudget {
    pub starts: usize,
    pub max_evals: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            starts: 8,
            max_evals: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start: usize,
    pub initial: Vec<f64>,
    pub best: Vec<f64>,
    pub length: f64,
    pub distance: f64,
    pub evals: usize,
}

/// Bernoulli lemniscate length `4 sqrt(2) int_0^{pi/4} (cos 2t)^{-1/2} dt`.
pub fn bernoulli_length() -> f64 {
    // substitute cos 2t = cos^2 s to remove the endpoint singularity:
    // int_0^{pi/4} (cos 2t)^{-1/2} dt = (1/sqrt 2) int_0^{pi/2} (1 - sin^2 s / 2)^{-1/2} ds
    let rule = GaussRule::new(40);
    let k = rule.integrate(0.0, PI / 2.0, |s| {
        1.0 / (1.0 - 0.5 * s.sin().powi(2)).sqrt()
    });
    4.0 * std::f64::consts::SQRT_2 * k / std::f64::consts::SQRT_2
}

/// Multistart maximization of `|L_p|` over normalized polynomials of degree `n`.
/// Start 0 is `z^n`; the others are drawn with `|a_k| <= 1`, `a_n` in `[-1.5, 1.5]`.
pub fn extremal_search(
    n: usize,
    budget: SearchBudget,
    seed: u64,
    ctrl: &TraceControl,
) -> Result<ExperimentReport, ExperimentError> {
    if n < 2 {
        return Err(ExperimentError::BadParameter(
            "degree must be at least 2".into(),
        ));
    }
    if budget.starts == 0 {
        return Err(ExperimentError::BadParameter(
            "need at least one start".into(),
        ));
    }
    let start_time = Instant::now();
    let dim = 2 * (n - 2) + 1;
    let objective = |x: &[f64]| -> f64 {
        let p = normalized_from_params(n, x);
        match lemniscate_length_trace_with(&p, ctrl) {
            Ok(l) => -l.total_length,
            Err(_) => f64::INFINITY,
        }
    };

    let records: Vec<StartRecord> = (0..budget.starts)
        .into_par_iter()
        .map(|s| {
            let initial: Vec<f64> = if s == 0 {
                vec![0.0; dim]
            } else {
                let mut rng = stream_rng(seed, s as u64);
                let mut x = Vec::with_capacity(dim);
                for _ in 2..n {
                    let a = uniform_disk(&mut rng, 1.0);
                    x.extend([a.re, a.im]);
                }
                x.push(3.0 * rng.random::<f64>() - 1.5);
                x
            };
            let (best, value, evals) =
                nelder_mead(objective, &initial, 0.25, budget.max_evals, 1e-12);
            let p = normalized_from_params(n, &best);
            StartRecord {
                start: s,
                initial,
                best,
                length: -value,
                distance: distance_to_extremal(&p),
                evals,
            }
        })
        .collect();

    let winner = records
        .iter()
        .filter(|r| r.length.is_finite())
        .max_by(|a, b| a.length.total_cmp(&b.length).then(b.start.cmp(&a.start)))
        .ok_or_else(|| {
            ExperimentError::BadParameter("no start produced a traceable lemniscate".into())
        })?;
    let best = normalized_from_params(n, &winner.best);
    let best_trace = lemniscate_length_trace_with(&best, ctrl)?;
    let p0 = lemniscate_length_trace_with(&Polynomial::unit_roots(n), ctrl)?;
    let eps = 3.0 * (best_trace.error_estimate + p0.error_estimate);

    let mut asserts = Vec::new();
    if n == 2 {
        let b = bernoulli_length();
        asserts.push(Assertion::le(
            "distance to z^2 - 1 <= 1e-2",
            winner.distance,
            1e-2,
        ));
        asserts.push(Assertion::le(
            "|L - bernoulli| / bernoulli <= 5e-3",
            (best_trace.total_length - b).abs() / b,
            5e-3,
        ));
    }

    let mut methods = BTreeMap::new();
    methods.insert(
        "trace".to_string(),
        MethodValue {
            value: best_trace.total_length,
            err: best_trace.error_estimate,
        },
    );
    let data = json!({
        "degree": n,
        "distance": winner.distance,
        "p0_length": p0.total_length,
        "exceeds_p0": best_trace.total_length > p0.total_length + eps,
        "escaped_monomial": records[0].length > TAU + eps,
        "starts": records,
    });

    Ok(ExperimentReport {
        polynomial: best.to_string(),
        methods,
        bounds: Bounds::for_degree(n),
        asserts,
        meta: Meta {
            seed,
            budget: format!("starts={};evals={}", budget.starts, budget.max_evals),
            elapsed_s: start_time.elapsed().as_secs_f64(),
        },
        data,
    })
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| a * k as f64)
        .collect()
}

/// An analytic `g` on a square `Q` with `u = Im g` and
/// `R = inf |g'| / 2` over the concentric square of twice the side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationCase {
    /// Coefficients of `g`, ascending.
    pub g: Vec<Complex64>,
    pub center: Complex64,
    pub side: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub integral_abs: f64,
    pub bound: f64,
    pub pass: bool,
}

impl OscillationCase {
    pub fn new(g: Vec<Complex64>, center: Complex64, side: f64) -> Result<Self, ExperimentError> {
        if !(side > 0.0) || g.len() < 2 {
            return Err(ExperimentError::BadParameter(
                "need side > 0 and a nonconstant g".into(),
            ));
        }
        let (min, max) = gradient_extremes(&derivative(&g), center, side);
        // a zero of g' is only found to the refinement resolution
        if !(min > 1e-9 * max) {
            return Err(ExperimentError::BadParameter(
                "g' vanishes on the doubled square".into(),
            ));
        }
        Ok(OscillationCase {
            g,
            center,
            side,
            r: 0.5 * min,
        })
    }

    /// Numerical `|int_Q e^{iu} dA|` against `4 A(Q) / (R l)`.
    pub fn check(&self) -> OscillationReport {
        let value = self.integral().norm();
        let bound = 4.0 * self.side / self.r;
        OscillationReport {
            integral_abs: value,
            bound,
            pass: value <= bound * (1.0 + 1e-6),
        }
    }

    /// `int_Q e^{i Im g} dA` by composite 12-point Gauss on a grid fine
    /// enough that each cell spans under two radians of phase.
    pub fn integral(&self) -> Complex64 {
        let (_, max) = gradient_extremes(&derivative(&self.g), self.center, 0.5 * self.side);
        let m = ((max * self.side / 2.0).ceil() as usize).max(1);
        let rule = GaussRule::new(12);
        let h = self.side / m as f64;
        let corner = self.center - Complex64::new(0.5 * self.side, 0.5 * self.side);
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                let base = corner + Complex64::new(i as f64 * h, j as f64 * h);
                for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
                    for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
                        let z = base + Complex64::new(x * h, y * h);
                        let u = horner(&self.g, z).im;
                        sum += Complex64::from_polar(wx * wy, u);
                    }
                }
            }
        }
        sum * h * h
    }
}

/// Approximate min and max of `|d|` on the square of side `2 * side` about
/// `center`: a 65 x 65 grid, then compass refinement around the grid minimum.
fn gradient_extremes(d: &[Complex64], center: Complex64, side: f64) -> (f64, f64) {
    let half = side;
    let m = 64;
    let h = 2.0 * half / m as f64;
    let at = |x: f64, y: f64| horner(d, center + Complex64::new(x, y)).norm();
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut max = 0.0f64;
    for i in 0..=m {
        for j in 0..=m {
            let (x, y) = (-half + i as f64 * h, -half + j as f64 * h);
            let v = at(x, y);
            max = max.max(v);
            if v < best.0 {
                best = (v, x, y);
            }
        }
    }
    let (mut v, mut x, mut y) = best;
    let mut step = h;
    while step > 1e-12 * half {
        let mut moved = false;
        for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (nx, ny) = ((x + dx).clamp(-half, half), (y + dy).clamp(-half, half));
            let nv = at(nx, ny);
            if nv < v {
                (v, x, y) = (nv, nx, ny);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (v, max)
}

/// Case `i` of a seeded family: `g` of degree 1 to 4, rescaled so that `R` is
/// log-uniform in `[0.5, 50]`.
pub fn random_oscillation_case(seed: u64, index: u64) -> OscillationCase {
    let mut rng = stream_rng(seed, index);
    loop {
        let degree = rng.random_range(1..=4usize);
        let g: Vec<Complex64> = (0..=degree)
            .map(|_| {
                Complex64::new(
                    2.0 * rng.random::<f64>() - 1.0,
                    2.0 * rng.random::<f64>() - 1.0,
                )
            })
            .collect();
        let center = Complex64::new(
            2.0 * rng.random::<f64>() - 1.0,
            2.0 * rng.random::<f64>() - 1.0,
        );
        let side = 0.25 + 1.75 * rng.random::<f64>();
        let target = 0.5 * (100f64.ln() * rng.random::<f64>()).exp();
        let Ok(case) = OscillationCase::new(g.clone(), center, side) else {
            continue;
        };
        let (_, max) = gradient_extremes(&derivative(&g), center, side);
        if case.r < 1e-2 * max {
            continue;
        }
        let s = target / case.r;
        let scaled = g.iter().map(|&c| c * s).collect();
        if let Ok(c) = OscillationCase::new(scaled, center, side) {
            return c;
        }
    }
}

/// `g = 2 R z` on `[0, 1]^2`, where `|int e^{2iRy}| = |e^{2iR} - 1| / (2R)`.
pub fn linear_oscillation_case(r: f64) -> OscillationCase {
    let g = vec![Complex64::new(0.0, 0.0), Complex64::new(2.0 * r, 0.0)];
    OscillationCase::new(g, Complex64::new(0.5, 0.5), 1.0).expect("constant gradient")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_matches_series() {
        // 4 K(1/sqrt 2) with K(k) = (pi/2) sum ((2m)! / (2^{2m} m!^2))^2 k^{2m}
        let mut term = 1.0;
        let mut sum = 0.0;
        for m in 0..200 {
            sum += term * term * 0.5f64.powi(m);
            let mf = m as f64;
            term *= (2.0 * mf + 1.0) / (2.0 * mf + 2.0);
        }
        let series = 2.0 * PI * sum;
        assert!(
            (bernoulli_length() - series).abs() < 1e-12,
            "{} {}",
            bernoulli_length(),
            series
        );
        assert!((bernoulli_length() - 7.416298709205487).abs() < 1e-12);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let (x, v, _) = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            0.5,
            2000,
            1e-14,
        );
        assert!(v < 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 2.0).abs() < 1e-4);
    }

    #[test]
    fn orbit_distance() {
        let p = normalized_from_params(3, &[0.0, 0.0, 1.0]);
        assert_eq!(distance_to_extremal(&p), 0.0);
        let q = normalized_from_params(3, &[0.3, 0.4, -1.0]);
        assert!((distance_to_extremal(&q) - 0.5).abs() < 1e-15);
        assert_eq!(distance_to_extremal(&Polynomial::monomial(4)), 1.0);
    }

    #[test]
    fn perturbation_sizes() {
        let mut rng = stream_rng(3, 0);
        for _ in 0..100 {
            let a = sample_perturbation(4, 0.05, &mut rng);
            assert_eq!(a.len(), 3);
            for (i, ak) in a.iter().enumerate() {
                assert!(ak.norm() <= 0.05f64.powi(i as i32 + 2));
            }
            assert_eq!(a[2].im, 0.0);
        }
    }

    #[test]
    fn linear_case_closed_form() {
        for r in [0.5, 1.0, 3.7, 20.0] {
            let case = linear_oscillation_case(r);
            assert!((case.r - r).abs() < 1e-12 * r);
            let exact = (Complex64::new(0.0, 2.0 * r).exp() - 1.0).norm() / (2.0 * r);
            assert!((case.integral().norm() - exact).abs() < 1e-10, "r = {r}");
            assert!(case.check().pass);
        }
    }

    #[test]
    fn gradient_minimum_found() {
        // |g'| = |2z - 2c| vanishes at c; shift it just outside the doubled square
        let c = Complex64::new(2.0 + 1e-3, 0.0);
        let g = vec![Complex64::new(0.0, 0.0), -2.0 * c, Complex64::new(1.0, 0.0)];
        let case = OscillationCase::new(g, Complex64::new(0.0, 0.0), 2.0).unwrap();
        assert!((case.r - 1e-3).abs() < 1e-9, "{}", case.r);
    }

    #[test]
    fn local_max_zero_is_exact() {
        let r = local_max_experiment(3, 0.0, 4, 1, &TraceControl::default()).unwrap();
        assert!(r.passed());
        assert_eq!(r.data["deficit"]["max"], 0.0);
    }

    #[test]
    fn monomial_report() {
        let budget = LengthBudget {
            sampler: Sampler::Grid {
                n_theta: 100,
                n_rho: 100,
            },
            ..Default::default()
        };
        let r = bounds_report(&Polynomial::monomial(3), &Method::ALL, &budget).unwrap();
        assert!(
            r.passed(),
            "{:?} {:?}",
            r.failures().collect::<Vec<_>>(),
            r.methods
        );
        assert_eq!(r.methods.len(), 4);
        for v in r.methods.values() {
            assert!((v.value - TAU).abs() < 1e-2 * TAU);
        }
        assert_eq!(r.data["distinct_roots"], 1);
    }
}
