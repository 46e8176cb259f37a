//! Predictor–corrector tracing of the level curves `|p| = 1` and `Re f = 0`.
//!
//! The predictor walks along the unit tangent `i * conj(g)/|g|`, where `g` is
//! `p'/p` for the modulus curve and `f'` for the real-part curve; the corrector
//! is Newton along the normal, which in complex form reads `z <- z - F(z)/g(z)`
//! with `F = log|p|` or `F = Re f`.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Polynomial;
use crate::roots::{critical_points, roots_of, RootError, RootSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error(transparent)]
    Roots(#[from] RootError),
    #[error("|p| never reaches 1 along the search ray from root {root}")]
    BracketFailure { root: Complex64 },
    #[error("step size collapsed near {at}")]
    StepCollapse { at: Complex64 },
    #[error("curve did not close after {steps} steps")]
    NonClosure { steps: usize },
    #[error("lemniscate is singular; node handling disabled (partial length {partial_length})")]
    PartialLength {
        partial_length: f64,
        singular_points: Vec<Complex64>,
    },
    #[error("radius must be positive")]
    BadRadius,
}

/// Step-control and node-handling parameters. Lengths marked "relative" are
/// multiplied by the curve scale `1 + max|root|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceControl {
    /// Relative step at zero curvature, before clamping.
    pub base_step: f64,
    /// Relative lower clamp on the step.
    pub h_min: f64,
    /// Relative upper clamp on the step.
    pub h_max: f64,
    /// Closure tolerance as a multiple of the absolute `h_min`.
    pub closure_factor: f64,
    pub max_steps: usize,
    /// `||p(zeta)| - 1|` at or below this marks a critical point as a node.
    pub singular_tol: f64,
    /// Jump across a node once within this distance of it.
    pub singular_guard: f64,
    /// Also jump once the corrector's rounding noise (in position) exceeds this.
    pub noise_tol: f64,
    pub node_handling: bool,
    pub on_curve_tol: f64,
}

impl Default for TraceControl {
    fn default() -> Self {
        TraceControl {
            base_step: 0.003,
            h_min: 1e-5,
            h_max: 0.05,
            closure_factor: 10.0,
            max_steps: 4_000_000,
            singular_tol: 1e-8,
            singular_guard: 1e-4,
            noise_tol: 1e-7,
            node_handling: true,
            on_curve_tol: 1e-10,
        }
    }
}

impl TraceControl {
    pub fn with_base_step(mut self, base_step: f64) -> Self {
        self.base_step = base_step;
        self
    }
}

/// A traced polyline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveComponent {
    pub vertices: Vec<Complex64>,
    /// Closed components do not repeat their first vertex in `vertices`.
    pub closed: bool,
    pub length: f64,
    pub on_curve_tol: f64,
    /// Estimated chord deficit with respect to the true arclength.
    pub error_estimate: f64,
    /// Nodes the tracer jumped across.
    pub nodes_crossed: Vec<Complex64>,
}

impl CurveComponent {
    pub fn segment_lengths(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .vertices
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .collect();
        if self.closed && self.vertices.len() > 1 {
            out.push((self.vertices[0] - *self.vertices.last().unwrap()).norm());
        }
        out
    }

    pub fn polyline_length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    /// Same curve with the vertex order reversed.
    pub fn reversed(&self) -> Self {
        let mut c = self.clone();
        c.vertices.reverse();
        c.length = c.polyline_length();
        c
    }

    /// Distance from `z` to the polyline.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        let n = self.vertices.len();
        if n == 1 {
            return (z - self.vertices[0]).norm();
        }
        let segs = if self.closed { n } else { n - 1 };
        (0..segs)
            .map(|i| segment_distance(z, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// The traced level curve `|p| = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemniscate {
    pub components: Vec<CurveComponent>,
    pub total_length: f64,
    pub error_estimate: f64,
    pub singular: bool,
    pub singular_points: Vec<Complex64>,
}

/// Open arcs of `Re f = 0` clipped to a disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealPartCurve {
    pub components: Vec<CurveComponent>,
    pub length: f64,
    pub error_estimate: f64,
    pub radius: f64,
}

#[derive(Clone, Copy)]
enum Level<'a> {
    /// `log|p| = 0`
    Modulus(&'a Polynomial),
    /// `Re f = 0`
    RealPart(&'a Polynomial),
}

#[derive(Clone, Copy)]
struct LevelEval {
    value: f64,
    /// complex gradient partner: the gradient of `value` is `conj(g)`
    g: Complex64,
    curvature: f64,
    /// rounding noise of a corrector step, in position units
    noise: f64,
}

impl Level<'_> {
    fn poly(&self) -> &Polynomial {
        match self {
            Level::Modulus(p) | Level::RealPart(p) => p,
        }
    }

    fn eval(&self, z: Complex64) -> LevelEval {
        let p = self.poly();
        let j = p.eval_jet(z);
        let err = p.eval_error_bound(z);
        match self {
            Level::Modulus(_) => {
                let g = j.dp / j.p;
                LevelEval {
                    value: j.p.norm().ln(),
                    g,
                    curvature: (j.ddp / j.dp - g).norm(),
                    noise: err / j.dp.norm(),
                }
            }
            Level::RealPart(_) => LevelEval {
                value: j.p.re,
                g: j.dp,
                curvature: (j.ddp / j.dp).norm(),
                noise: err / j.dp.norm(),
            },
        }
    }

    fn tangent(e: &LevelEval) -> Option<Complex64> {
        let m = e.g.norm();
        if m == 0.0 || !m.is_finite() {
            return None;
        }
        Some(Complex64::i() * e.g.conj() / m)
    }

    /// Residual used for the on-curve tolerance.
    fn residual(&self, z: Complex64) -> f64 {
        match self {
            Level::Modulus(p) => (p.eval(z).norm() - 1.0).abs(),
            Level::RealPart(p) => p.eval(z).re.abs(),
        }
    }

    /// Newton along the normal until the level value is at rounding level.
    fn correct(&self, mut z: Complex64, scale: f64) -> Option<Complex64> {
        for _ in 0..30 {
            let e = self.eval(z);
            if !e.value.is_finite() || e.g.norm() == 0.0 || !e.g.norm().is_finite() {
                return None;
            }
            let dz = e.value / e.g;
            z -= dz;
            if dz.norm() <= 1e-15 * scale || dz.norm() <= 0.5 * e.noise {
                return Some(z);
            }
        }
        let e = self.eval(z);
        if e.value.abs() * 1e3 < 1.0 && (e.value / e.g).norm() <= 1e-12 * scale {
            Some(z)
        } else {
            None
        }
    }
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

fn dot(a: Complex64, b: Complex64) -> f64 {
    (a * b.conj()).re
}

struct Node {
    at: Complex64,
    /// radius at which the level curve near a near-node separates from the crossing
    gap: f64,
    /// distance to the nearest other critical point
    isolation: f64,
}

impl Node {
    /// `dev` is the level value at the critical point `at` of multiplicity `m`
    /// (as a root of the derivative); `rounding` is its evaluation error.
    fn new(
        f: &Polynomial,
        at: Complex64,
        m: usize,
        dev: f64,
        rounding: f64,
        crit: &RootSet,
    ) -> Node {
        // deviations within rounding are exact nodes
        let excess = if dev <= 100.0 * rounding { 0.0 } else { dev };
        let gap = if excess == 0.0 {
            0.0
        } else {
            let taylor = f.taylor_along(at, Complex64::new(1.0, 0.0));
            let c = taylor
                .get(m + 1)
                .map(|c| c.norm())
                .unwrap_or(1.0)
                .max(f64::MIN_POSITIVE);
            (excess / c).powf(1.0 / (m + 1) as f64)
        };
        let isolation = crit
            .roots
            .iter()
            .map(|r| (r.location - at).norm())
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min);
        Node { at, gap, isolation }
    }
}

enum Stop {
    /// Closed at the starting point.
    Closed,
    /// Left the disk of the given radius at the returned boundary point.
    Exited(Complex64),
}

struct Tracer<'a> {
    level: Level<'a>,
    ctrl: &'a TraceControl,
    scale: f64,
    nodes: Vec<Node>,
    /// critical points of the level function; near-nodes need steps below `h_min`
    critical: Vec<Complex64>,
    clip_radius: Option<f64>,
}

impl Tracer<'_> {
    fn h_min(&self) -> f64 {
        self.ctrl.h_min * self.scale
    }

    fn h_max(&self) -> f64 {
        self.ctrl.h_max * self.scale
    }

    /// Smallest admissible step at `z`: `h_min`, shrunk near critical points so
    /// that the branches of a near-node stay resolved.
    fn step_floor(&self, z: Complex64) -> f64 {
        let d = self
            .critical
            .iter()
            .map(|c| (z - c).norm())
            .fold(f64::INFINITY, f64::min);
        self.h_min().min(0.1 * d)
    }

    fn trace(
        &self,
        seed: Complex64,
        initial_dir: Option<Complex64>,
    ) -> Result<(CurveComponent, Stop), TraceError> {
        let ctrl = self.ctrl;
        let e0 = self.level.eval(seed);
        let t0 = Level::tangent(&e0).ok_or(TraceError::StepCollapse { at: seed })?;
        let mut dir = match initial_dir {
            Some(d) if dot(d, t0) < 0.0 => -t0,
            _ => t0,
        };
        let start_dir = dir;
        let closure_tol = ctrl.closure_factor * self.h_min();
        let mut z = seed;
        let mut vertices = vec![seed];
        let mut length = 0.0;
        let mut deficit = 0.0;
        let mut nodes_crossed = Vec::new();
        let mut steps = 0usize;

        while steps < ctrl.max_steps {
            steps += 1;
            let e = self.level.eval(z);

            if let Some(node) = self.node_ahead(z, dir, &e) {
                if !ctrl.node_handling {
                    return Err(TraceError::StepCollapse { at: z });
                }
                let guess = node.at * 2.0 - z;
                let out = self
                    .level
                    .correct(guess, self.scale)
                    .ok_or(TraceError::StepCollapse { at: z })?;
                let ee = self.level.eval(out);
                let t = Level::tangent(&ee).ok_or(TraceError::StepCollapse { at: out })?;
                let new_dir = if dot(t, dir) >= 0.0 { t } else { -t };
                let seg = (out - z).norm();
                deficit += 4.0 * node.gap;
                nodes_crossed.push(node.at);
                length += seg;
                z = out;
                dir = new_dir;
                vertices.push(z);
                continue;
            }

            let floor = self.step_floor(z);
            let mut h =
                (ctrl.base_step * self.scale / (e.curvature + 1.0)).clamp(floor, self.h_max());
            let (z_new, dir_new) = loop {
                if h < floor / 256.0 {
                    return Err(TraceError::StepCollapse { at: z });
                }
                if let Some(ok) = self.try_step(z, dir, h) {
                    break ok;
                }
                h *= 0.5;
            };

            if steps >= 10
                && segment_distance(vertices[0], z, z_new) <= closure_tol
                && dot(dir, start_dir) > 0.5
                && self.clip_radius.is_none()
            {
                let chord = (vertices[0] - z).norm();
                length += chord;
                deficit += chord * turn(dir, start_dir).powi(2) / 24.0;
                return Ok((
                    CurveComponent {
                        vertices,
                        closed: true,
                        length,
                        on_curve_tol: ctrl.on_curve_tol,
                        error_estimate: deficit,
                        nodes_crossed,
                    },
                    Stop::Closed,
                ));
            }

            if let Some(r) = self.clip_radius {
                if z_new.norm() >= r {
                    let exit = self.onto_circle(clip_to_circle(z, z_new, r), r);
                    length += (exit - z).norm();
                    vertices.push(exit);
                    return Ok((
                        CurveComponent {
                            vertices,
                            closed: false,
                            length,
                            on_curve_tol: ctrl.on_curve_tol,
                            error_estimate: deficit,
                            nodes_crossed,
                        },
                        Stop::Exited(exit),
                    ));
                }
            }

            let chord = (z_new - z).norm();
            length += chord;
            deficit += chord * turn(dir, dir_new).powi(2) / 24.0;
            z = z_new;
            dir = dir_new;
            vertices.push(z);
        }
        Err(TraceError::NonClosure { steps })
    }

    fn try_step(&self, z: Complex64, dir: Complex64, h: f64) -> Option<(Complex64, Complex64)> {
        let pred = z + dir * h;
        let z_new = self.level.correct(pred, self.scale)?;
        if (z_new - pred).norm() > 0.3 * h {
            return None;
        }
        let e = self.level.eval(z_new);
        let t = Level::tangent(&e)?;
        let t = if dot(t, dir) >= 0.0 { t } else { -t };
        // reject large turns (branch switching)
        if dot(t, dir) < 0.9 {
            return None;
        }
        let step = z_new - z;
        if step.norm() < 0.2 * h || dot(step, dir) <= 0.0 {
            return None;
        }
        Some((z_new, t))
    }

    /// Newton in the angle on `|z| = r`, moving a clipped chord end onto the curve.
    fn onto_circle(&self, z: Complex64, r: f64) -> Complex64 {
        let mut theta = z.arg();
        for _ in 0..20 {
            let w = Complex64::from_polar(r, theta);
            let e = self.level.eval(w);
            let slope = (e.g * Complex64::i() * w).re;
            if slope == 0.0 || !e.value.is_finite() {
                return z;
            }
            let dt = e.value / slope;
            // stay within a fraction of a step of the chord end
            if dt.abs() * r > self.h_max() {
                return z;
            }
            theta -= dt;
            if dt.abs() * r <= 0.5 * e.noise.max(1e-16 * r) {
                break;
            }
        }
        Complex64::from_polar(r, theta)
    }

    fn node_ahead(&self, z: Complex64, dir: Complex64, e: &LevelEval) -> Option<&Node> {
        self.nodes.iter().find(|node| {
            let to = node.at - z;
            let d = to.norm();
            // a node is either always jumped or always resolved by small steps;
            // mixing the two on repeat visits reconnects arcs inconsistently
            let guard = self.ctrl.singular_guard * self.scale;
            let jumpable = node.gap <= 1e-3 * guard;
            let close = d <= guard
                || (e.noise >= self.ctrl.noise_tol * self.scale
                    && d <= 0.5 * self.scale
                    && node.gap <= 1e-3 * d);
            jumpable && close && d > 0.0 && d <= 0.5 * node.isolation && dot(dir, to) >= 0.8 * d
        })
    }
}

fn turn(a: Complex64, b: Complex64) -> f64 {
    (b * a.conj()).arg().abs()
}

fn clip_to_circle(a: Complex64, b: Complex64, r: f64) -> Complex64 {
    // |a + t(b-a)|^2 = r^2 for t in [0, 1]
    let d = b - a;
    let qa = d.norm_sqr();
    let qb = 2.0 * dot(a, d);
    let qc = a.norm_sqr() - r * r;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let t = if qb >= 0.0 {
        (2.0 * -qc) / (qb + disc)
    } else {
        (-qb + disc) / (2.0 * qa)
    };
    a + d * t.clamp(0.0, 1.0)
}

fn curve_scale(roots: &RootSet) -> f64 {
    1.0 + roots.max_modulus()
}

fn modulus_nodes(p: &Polynomial, crit: &RootSet, ctrl: &TraceControl) -> Vec<Node> {
    crit.roots
        .iter()
        .filter_map(|r| {
            let dev = (p.eval(r.location).norm() - 1.0).abs();
            (dev <= ctrl.singular_tol).then(|| {
                Node::new(
                    p,
                    r.location,
                    r.multiplicity,
                    dev,
                    p.eval_error_bound(r.location),
                    crit,
                )
            })
        })
        .collect()
}

/// One point on `|p| = 1` per root of `p`, found by marching outward from
/// the root and bisecting on `log|p|`.
pub fn seed_points(p: &Polynomial, roots: &RootSet) -> Result<Vec<Complex64>, TraceError> {
    seed_points_avoiding(p, roots, &[], 0.0)
}

fn seed_points_avoiding(
    p: &Polynomial,
    roots: &RootSet,
    avoid: &[Complex64],
    guard: f64,
) -> Result<Vec<Complex64>, TraceError> {
    let centroid =
        roots.expanded().iter().sum::<Complex64>() / roots.total_multiplicity().max(1) as f64;
    let search = 2.0 + roots.max_modulus();
    let mut seeds = Vec::with_capacity(roots.roots.len());
    for root in &roots.roots {
        let eta = root.location;
        let away = eta - centroid;
        let base = if away.norm() > 1e-9 * (1.0 + eta.norm()) {
            away / away.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut found = None;
        for attempt in 0..12 {
            let u = base * Complex64::from_polar(1.0, 0.7 * attempt as f64);
            let seed = bracket_along_ray(p, eta, u, search)
                .ok_or(TraceError::BracketFailure { root: eta })?;
            if avoid.iter().all(|&a| (seed - a).norm() > 4.0 * guard) {
                found = Some(seed);
                break;
            }
        }
        seeds.push(found.ok_or(TraceError::BracketFailure { root: eta })?);
    }
    Ok(seeds)
}

fn bracket_along_ray(
    p: &Polynomial,
    eta: Complex64,
    u: Complex64,
    search: f64,
) -> Option<Complex64> {
    let f = |t: f64| p.eval(eta + u * t).norm().ln();
    let tiny = 1e-9 * (1.0 + eta.norm());
    let mut t = 0.0;
    let mut ft = f64::NEG_INFINITY;
    while t < search {
        let z = eta + u * t;
        let step = if ft.is_finite() {
            let g = crate::poly::phi(p, z)
                .map(|v| v.norm())
                .unwrap_or(f64::INFINITY);
            (0.5 * ft.abs() / g).clamp(1e-7 * search, 1e-2 * search)
        } else {
            tiny
        };
        let t_next = (t + step).min(search);
        let f_next = f(t_next);
        if f_next >= 0.0 {
            let (mut lo, mut hi) = (t, t_next);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let z_lo = eta + u * lo;
            let z_hi = eta + u * hi;
            return Some(if f(hi).abs() < f(lo).abs() {
                z_hi
            } else {
                z_lo
            });
        }
        t = t_next;
        ft = f_next;
        if t_next >= search {
            break;
        }
    }
    None
}

/// Traces the closed component of `|p| = 1` through `seed`.
pub fn trace_component(
    p: &Polynomial,
    seed: Complex64,
    ctrl: &TraceControl,
) -> Result<CurveComponent, TraceError> {
    let roots = roots_of(p)?;
    let crit = critical_points(p)?;
    let tracer = Tracer {
        level: Level::Modulus(p),
        ctrl,
        scale: curve_scale(&roots),
        nodes: modulus_nodes(p, &crit, ctrl),
        critical: crit.locations(),
        clip_radius: None,
    };
    tracer.trace(seed, None).map(|(c, _)| c)
}

/// Length of `|p| = 1` by tracing every component, with default controls.
pub fn lemniscate_length_trace(p: &Polynomial) -> Result<Lemniscate, TraceError> {
    lemniscate_length_trace_with(p, &TraceControl::default())
}

pub fn lemniscate_length_trace_with(
    p: &Polynomial,
    ctrl: &TraceControl,
) -> Result<Lemniscate, TraceError> {
    let roots = roots_of(p)?;
    let crit = critical_points(p)?;
    let scale = curve_scale(&roots);
    let singular_points: Vec<Complex64> = crit
        .roots
        .iter()
        .map(|r| r.location)
        .filter(|&z| (p.eval(z).norm() - 1.0).abs() <= ctrl.singular_tol)
        .collect();
    let tracer = Tracer {
        level: Level::Modulus(p),
        ctrl,
        scale,
        nodes: modulus_nodes(p, &crit, ctrl),
        critical: crit.locations(),
        clip_radius: None,
    };
    let guard = ctrl.singular_guard * scale;
    let seeds = seed_points_avoiding(p, &roots, &singular_points, guard)?;
    let dedup_tol = ctrl.closure_factor * tracer.h_min();

    let mut components: Vec<CurveComponent> = Vec::new();
    for seed in seeds {
        if components.iter().any(|c| c.distance_to(seed) <= dedup_tol) {
            continue;
        }
        match tracer.trace(seed, None) {
            Ok((c, _)) => components.push(c),
            Err(TraceError::StepCollapse { .. })
                if !ctrl.node_handling && !singular_points.is_empty() =>
            {
                return Err(TraceError::PartialLength {
                    partial_length: components.iter().map(|c| c.length).sum(),
                    singular_points,
                });
            }
            Err(e) => return Err(e),
        }
    }
    let total_length = components.iter().map(|c| c.length).sum();
    let error_estimate = components.iter().map(|c| c.error_estimate).sum();
    Ok(Lemniscate {
        components,
        total_length,
        error_estimate,
        singular: !singular_points.is_empty(),
        singular_points,
    })
}

/// Sign changes of `theta -> Re f(rho e^{i theta})` on a uniform sweep,
/// returned as bracketing angle pairs.
pub(crate) fn circle_sign_changes(f: &Polynomial, rho: f64, samples: usize) -> Vec<(f64, f64)> {
    let step = std::f64::consts::TAU / samples as f64;
    let val = |k: usize| f.eval(Complex64::from_polar(rho, step * k as f64)).re;
    let mut out = Vec::new();
    let first = val(0);
    let mut prev = first;
    for k in 1..=samples {
        let cur = if k == samples { first } else { val(k) };
        if (prev < 0.0) != (cur < 0.0) {
            out.push((step * (k - 1) as f64, step * k as f64));
        }
        prev = cur;
    }
    out
}

/// Length of `{Re f = 0}` inside the disk of radius `r`, by tracing every arc
/// inward from its crossing with the boundary circle.
pub fn realpart_curve_length(f: &Polynomial, r: f64) -> Result<RealPartCurve, TraceError> {
    realpart_curve_length_with(f, r, &TraceControl::default())
}

pub fn realpart_curve_length_with(
    f: &Polynomial,
    r: f64,
    ctrl: &TraceControl,
) -> Result<RealPartCurve, TraceError> {
    if !(r > 0.0) {
        return Err(TraceError::BadRadius);
    }
    let crit = critical_points(f)?;
    let scale = r.max(1.0);
    let nodes = crit
        .roots
        .iter()
        .filter_map(|c| {
            let v = f.eval(c.location).re.abs();
            let tol = ctrl.singular_tol * (1.0 + f.eval(c.location).norm());
            (v <= tol && c.location.norm() < r).then(|| {
                Node::new(
                    f,
                    c.location,
                    c.multiplicity,
                    v,
                    f.eval_error_bound(c.location),
                    &crit,
                )
            })
        })
        .collect();
    let tracer = Tracer {
        level: Level::RealPart(f),
        ctrl,
        scale,
        nodes,
        critical: crit.locations(),
        clip_radius: Some(r),
    };

    // crossings with the circle, refined until the count is stable
    let n = f.degree();
    let mut samples = 256 * n;
    let mut brackets = circle_sign_changes(f, r, samples);
    for _ in 0..8 {
        samples *= 2;
        let finer = circle_sign_changes(f, r, samples);
        let same = finer.len() == brackets.len();
        brackets = finer;
        if same {
            break;
        }
    }
    let crossings: Vec<Complex64> = brackets
        .iter()
        .map(|&(a, b)| {
            let g = |t: f64| f.eval(Complex64::from_polar(r, t)).re;
            let (mut lo, mut hi) = (a, b);
            let glo = g(lo);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (g(mid) < 0.0) == (glo < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Complex64::from_polar(r, 0.5 * (lo + hi))
        })
        .collect();

    let match_tol = 1e-6 * r;
    let mut used = vec![false; crossings.len()];
    let mut components = Vec::new();
    for i in 0..crossings.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let start = crossings[i];
        let (comp, stop) = tracer.trace(start, Some(-start / start.norm()))?;
        if let Stop::Exited(exit) = stop {
            if let Some(j) = (0..crossings.len()).filter(|&j| !used[j]).min_by(|&a, &b| {
                (crossings[a] - exit)
                    .norm()
                    .total_cmp(&(crossings[b] - exit).norm())
            }) {
                if (crossings[j] - exit).norm() <= match_tol.max(4.0 * tracer.h_max()) {
                    used[j] = true;
                }
            }
        }
        components.push(comp);
    }
    let length = components.iter().map(|c| c.length).sum();
    let error_estimate = components.iter().map(|c| c.error_estimate).sum();
    Ok(RealPartCurve {
        components,
        length,
        error_estimate,
        radius: r,
    })
}

/// Writes `component,x,y` rows; closed components repeat their first vertex.
pub fn write_polyline_csv<W: Write>(components: &[CurveComponent], mut out: W) -> io::Result<()> {
    writeln!(out, "component,x,y")?;
    for (id, comp) in components.iter().enumerate() {
        for v in &comp.vertices {
            writeln!(out, "{id},{:?},{:?}", v.re, v.im)?;
        }
        if comp.closed {
            if let Some(v) = comp.vertices.first() {
                writeln!(out, "{id},{:?},{:?}", v.re, v.im)?;
            }
        }
    }
    Ok(())
}

/// Residual of the level equation at `z` (`||p(z)| - 1|`).
pub fn modulus_residual(p: &Polynomial, z: Complex64) -> f64 {
    Level::Modulus(p).residual(z)
}

/// Residual of the level equation at `z` (`|Re f(z)|`).
pub fn realpart_residual(f: &Polynomial, z: Complex64) -> f64 {
    Level::RealPart(f).residual(z)
}
