//! Adaptive integration over the sublevel set `E = {|p| < 1}`.
//!
//! The bounding square is split into a quadtree. Each cell is classified from
//! root-distance bounds on `log|p|`, so "inside" and "outside" are certain;
//! boundary cells are clipped by the linearization of `log|p|` at their centre.
//! Cells within one side length of a listed singular point are integrated as a
//! fan of Duffy-mapped triangles with apex at that point, which cancels a
//! `1/|z - xi|` singularity. Each leaf's error is `|Q(cell) - sum Q(children)|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gauss::GaussRule;
use crate::poly::Polynomial;
use crate::roots::{combined_roots, critical_points, roots_of, RootError, RootSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error(transparent)]
    Roots(#[from] RootError),
    #[error("cell budget exhausted after {cells_used} cells (value {value}, error estimate {error_estimate})")]
    BudgetExhausted {
        value: Complex64,
        error_estimate: f64,
        cells_used: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub cells_used: usize,
    pub singular_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadBudget {
    /// Maximum number of cell-rule evaluations.
    pub max_cells: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Gauss points per direction.
    pub order: usize,
}

impl Default for QuadBudget {
    fn default() -> Self {
        QuadBudget {
            max_cells: 3_000_000,
            rel_tol: 1e-4,
            abs_tol: 1e-10,
            order: 3,
        }
    }
}

/// The region `E` with its bounding square and root data.
#[derive(Debug, Clone)]
pub struct RegionE {
    p: Polynomial,
    roots: RootSet,
    corner: Complex64,
    side: f64,
}

impl RegionE {
    pub fn new(p: &Polynomial) -> Result<Self, QuadError> {
        let roots = roots_of(p)?;
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for r in &roots.roots {
            x0 = x0.min(r.location.re);
            x1 = x1.max(r.location.re);
            y0 = y0.min(r.location.im);
            y1 = y1.max(r.location.im);
        }
        let side = (x1 - x0).max(y1 - y0) + 4.0;
        let mid = Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
        Ok(RegionE {
            p: p.clone(),
            roots,
            corner: mid - Complex64::new(0.5 * side, 0.5 * side),
            side,
        })
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.p
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    /// Lower-left and upper-right corners of the bounding square.
    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        (
            self.corner,
            self.corner + Complex64::new(self.side, self.side),
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.p.eval(z).norm() < 1.0
    }

    pub fn diameter(&self) -> f64 {
        self.side * std::f64::consts::SQRT_2
    }

    /// Certain bounds on `log|p|` over the disk `|z - c| <= r`.
    fn log_modulus_bounds(&self, c: Complex64, r: f64) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for root in &self.roots.roots {
            let d = (c - root.location).norm();
            let m = root.multiplicity as f64;
            lo += m * (d - r).max(0.0).ln();
            hi += m * (d + r).ln();
        }
        // rounding in the root locations
        let slack = self.roots.residual_bound.max(1e-14);
        (lo - slack, hi + slack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellClass {
    Inside,
    Outside,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct CellKey {
    level: u32,
    ix: u64,
    iy: u64,
}

impl CellKey {
    fn children(self) -> [CellKey; 4] {
        let (l, x, y) = (self.level + 1, 2 * self.ix, 2 * self.iy);
        [
            CellKey {
                level: l,
                ix: x,
                iy: y,
            },
            CellKey {
                level: l,
                ix: x + 1,
                iy: y,
            },
            CellKey {
                level: l,
                ix: x,
                iy: y + 1,
            },
            CellKey {
                level: l,
                ix: x + 1,
                iy: y + 1,
            },
        ]
    }
}

#[derive(Debug, Clone, Copy)]
struct CellEval {
    q: Complex64,
    class: CellClass,
    singular: bool,
}

struct Engine<'a> {
    region: &'a RegionE,
    f: &'a (dyn Fn(Complex64) -> Complex64 + Sync),
    singular: &'a [Complex64],
    rule: GaussRule,
    base_side: f64,
}

const INITIAL_GRID: u64 = 8;

impl Engine<'_> {
    fn side(&self, key: CellKey) -> f64 {
        self.base_side / (1u64 << key.level) as f64
    }

    fn lower_left(&self, key: CellKey) -> Complex64 {
        let s = self.side(key);
        self.region.corner + Complex64::new(key.ix as f64 * s, key.iy as f64 * s)
    }

    fn classify(&self, key: CellKey) -> CellClass {
        let s = self.side(key);
        let c = self.lower_left(key) + Complex64::new(0.5 * s, 0.5 * s);
        let (lo, hi) = self
            .region
            .log_modulus_bounds(c, s * std::f64::consts::FRAC_1_SQRT_2);
        if hi < 0.0 {
            CellClass::Inside
        } else if lo > 0.0 {
            CellClass::Outside
        } else {
            CellClass::Boundary
        }
    }

    /// Nearest listed singular point within one side length of the cell.
    fn nearby_singularity(&self, key: CellKey) -> Option<Complex64> {
        let s = self.side(key);
        let ll = self.lower_left(key);
        self.singular
            .iter()
            .map(|&xi| {
                let dx = (ll.re - xi.re).max(0.0).max(xi.re - ll.re - s);
                let dy = (ll.im - xi.im).max(0.0).max(xi.im - ll.im - s);
                (xi, dx.hypot(dy))
            })
            .filter(|&(_, d)| d < s)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(xi, _)| xi)
    }

    fn eval_cell(&self, key: CellKey) -> CellEval {
        let class = self.classify(key);
        if class == CellClass::Outside {
            return CellEval {
                q: Complex64::new(0.0, 0.0),
                class,
                singular: false,
            };
        }
        let s = self.side(key);
        let ll = self.lower_left(key);
        let square = [
            ll,
            ll + s,
            ll + Complex64::new(s, s),
            ll + Complex64::new(0.0, s),
        ];
        let polygon: Vec<Complex64> = match class {
            CellClass::Inside => square.to_vec(),
            _ => self.clip(&square, ll + Complex64::new(0.5 * s, 0.5 * s)),
        };
        if polygon.len() < 3 {
            return CellEval {
                q: Complex64::new(0.0, 0.0),
                class,
                singular: false,
            };
        }
        match self.nearby_singularity(key) {
            Some(xi) => CellEval {
                q: self.fan(&polygon, xi),
                class,
                singular: true,
            },
            None if class == CellClass::Inside => CellEval {
                q: self.tensor(ll, s),
                class,
                singular: false,
            },
            None => {
                let apex = polygon.iter().sum::<Complex64>() / polygon.len() as f64;
                CellEval {
                    q: self.fan(&polygon, apex),
                    class,
                    singular: false,
                }
            }
        }
    }

    /// Clips a CCW polygon to the linearized sublevel set at `c`.
    fn clip(&self, poly: &[Complex64], c: Complex64) -> Vec<Complex64> {
        let j = self.region.p.eval_jet(c);
        let f0 = j.p.norm().ln();
        let phi = j.dp / j.p;
        if !f0.is_finite() || !phi.re.is_finite() || !phi.im.is_finite() {
            return poly.to_vec();
        }
        let lin = |z: Complex64| f0 + (phi * (z - c)).re;
        let mut out = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let (fa, fb) = (lin(a), lin(b));
            if fa < 0.0 {
                out.push(a);
            }
            if (fa < 0.0) != (fb < 0.0) {
                let t = fa / (fa - fb);
                out.push(a + (b - a) * t);
            }
        }
        out
    }

    fn tensor(&self, ll: Complex64, s: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&x, &wx) in self.rule.nodes.iter().zip(&self.rule.weights) {
            for (&y, &wy) in self.rule.nodes.iter().zip(&self.rule.weights) {
                acc += (self.f)(ll + Complex64::new(x * s, y * s)) * (wx * wy);
            }
        }
        acc * (s * s)
    }

    /// Signed sum over triangles `(apex, v_k, v_{k+1})`, each Duffy-mapped from
    /// the apex so that `1/|z - apex|` is integrated without loss.
    fn fan(&self, poly: &[Complex64], apex: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..poly.len() {
            let b = poly[k];
            let c = poly[(k + 1) % poly.len()];
            let e1 = b - apex;
            let e2 = c - b;
            let cross = e1.re * e2.im - e1.im * e2.re;
            if cross == 0.0 {
                continue;
            }
            let mut tri = Complex64::new(0.0, 0.0);
            for (&u, &wu) in self.rule.nodes.iter().zip(&self.rule.weights) {
                for (&v, &wv) in self.rule.nodes.iter().zip(&self.rule.weights) {
                    let z = apex + e1 * u + e2 * (u * v);
                    tri += (self.f)(z) * (wu * wv * u);
                }
            }
            acc += tri * cross;
        }
        acc
    }
}

#[derive(Debug, Clone, Copy)]
struct Leaf {
    key: CellKey,
    own: CellEval,
    kids: [CellEval; 4],
    value: Complex64,
    err: f64,
}

impl Leaf {
    fn build(key: CellKey, own: CellEval, engine: &Engine) -> Leaf {
        let outside = CellEval {
            q: Complex64::new(0.0, 0.0),
            class: CellClass::Outside,
            singular: false,
        };
        if own.class == CellClass::Outside {
            return Leaf {
                key,
                own,
                kids: [outside; 4],
                value: own.q,
                err: 0.0,
            };
        }
        let kids = key.children().map(|k| engine.eval_cell(k));
        let value: Complex64 = kids.iter().map(|k| k.q).sum();
        Leaf {
            key,
            own,
            kids,
            value,
            err: (own.q - value).norm(),
        }
    }
}

/// Integrates `f` over `E` with adaptive refinement. `singularities` lists the
/// points where `f` may behave like `1/|z - xi|`.
pub fn integrate_over_e(
    region: &RegionE,
    f: &(dyn Fn(Complex64) -> Complex64 + Sync),
    singularities: &RootSet,
    budget: &QuadBudget,
) -> Result<QuadratureResult, QuadError> {
    let singular: Vec<Complex64> = singularities.locations();
    let engine = Engine {
        region,
        f,
        singular: &singular,
        rule: GaussRule::new(budget.order.max(1)),
        base_side: region.side / INITIAL_GRID as f64,
    };
    let s_total = region.side;
    let boundary_h = 1e-3 * region.diameter();
    let min_side = |leaf: &Leaf| -> f64 {
        if leaf.kids.iter().any(|k| k.singular) || leaf.own.singular {
            1e-9 * s_total
        } else if leaf.own.class == CellClass::Boundary {
            boundary_h
        } else {
            1e-7 * s_total
        }
    };

    let initial: Vec<CellKey> = (0..INITIAL_GRID)
        .flat_map(|iy| (0..INITIAL_GRID).map(move |ix| CellKey { level: 0, ix, iy }))
        .collect();
    let mut leaves: Vec<Leaf> = initial
        .par_iter()
        .map(|&k| Leaf::build(k, engine.eval_cell(k), &engine))
        .collect();
    let mut cells_used = initial.len() * 5;

    loop {
        leaves.sort_by_key(|l| l.key);
        let value: Complex64 = leaves.iter().map(|l| l.value).sum();
        let err: f64 = leaves.iter().map(|l| l.err).sum();
        let tol = (budget.rel_tol * value.norm()).max(budget.abs_tol);

        let splittable =
            |l: &Leaf| 0.5 * engine.side(l.key) >= min_side(l) && l.own.class != CellClass::Outside;
        let forced =
            |l: &Leaf| l.own.class == CellClass::Boundary && engine.side(l.key) > s_total / 64.0;
        let mut candidates: Vec<usize> = (0..leaves.len())
            .filter(|&i| splittable(&leaves[i]) && (forced(&leaves[i]) || leaves[i].err > 0.0))
            .collect();
        let any_forced = candidates.iter().any(|&i| forced(&leaves[i]));
        if candidates.is_empty() || (!any_forced && err <= tol) {
            let singular_cells = leaves
                .iter()
                .map(|l| l.kids.iter().filter(|k| k.singular).count())
                .sum();
            let on_boundary = singular
                .iter()
                .any(|&xi| (region.p.eval(xi).norm() - 1.0).abs() <= 1e-10);
            return Ok(QuadratureResult {
                value,
                error_estimate: if on_boundary { 3.0 * err } else { err },
                cells_used,
                singular_cells,
            });
        }
        if cells_used >= budget.max_cells {
            return Err(QuadError::BudgetExhausted {
                value,
                error_estimate: err,
                cells_used,
            });
        }

        // forced splits first, then largest errors; ties broken by key
        candidates.sort_by(|&a, &b| {
            let (la, lb) = (&leaves[a], &leaves[b]);
            forced(lb)
                .cmp(&forced(la))
                .then(lb.err.total_cmp(&la.err))
                .then(la.key.cmp(&lb.key))
        });
        let batch = candidates.len().min((leaves.len() / 8).max(64));
        let n_forced = candidates
            .iter()
            .take_while(|&&i| forced(&leaves[i]))
            .count();
        let chosen: Vec<usize> = candidates[..batch.max(n_forced)].to_vec();

        let mut split = vec![false; leaves.len()];
        let mut work = Vec::with_capacity(chosen.len() * 4);
        for &i in &chosen {
            split[i] = true;
            let l = &leaves[i];
            for (k, e) in l.key.children().into_iter().zip(l.kids) {
                work.push((k, e));
            }
        }
        cells_used += work.len() * 4;
        let fresh: Vec<Leaf> = work
            .par_iter()
            .map(|&(k, e)| Leaf::build(k, e, &engine))
            .collect();
        let mut next: Vec<Leaf> = leaves
            .iter()
            .zip(&split)
            .filter(|(_, &s)| !s)
            .map(|(l, _)| *l)
            .collect();
        next.extend(fresh);
        leaves = next;
    }
}

/// Singular points `xi` (roots of `p p'`) of the length integrands.
pub fn singular_points(p: &Polynomial) -> Result<RootSet, QuadError> {
    Ok(combined_roots(&roots_of(p)?, &critical_points(p)?))
}

fn sum_inverse(z: Complex64, pts: &RootSet) -> Complex64 {
    pts.roots
        .iter()
        .map(|r| r.multiplicity as f64 / (z - r.location))
        .sum()
}

/// `(|phi|/phi)(phi - psi)`, written with root sums so it stays accurate
/// near the roots.
fn g1(roots: &RootSet, crit: &RootSet, z: Complex64) -> Complex64 {
    let phi = sum_inverse(z, roots);
    let psi = sum_inverse(z, crit);
    let m = phi.norm();
    if m == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (phi.conj() / m) * (phi - psi)
}

/// `2|p'| - (p|p'|/p') psi`.
fn g2(p: &Polynomial, crit: &RootSet, z: Complex64) -> Complex64 {
    let j = p.eval_jet(z);
    let m = j.dp.norm();
    if m == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let psi = sum_inverse(z, crit);
    2.0 * m - j.p * (j.dp.conj() / m) * psi
}

/// `|L| = Re of the integral over E of (|phi|/phi)(phi - psi)`. The imaginary
/// part of the returned value should vanish.
pub fn length_area_v1(p: &Polynomial) -> Result<QuadratureResult, QuadError> {
    length_area_v1_with(p, &QuadBudget::default())
}

pub fn length_area_v1_with(
    p: &Polynomial,
    budget: &QuadBudget,
) -> Result<QuadratureResult, QuadError> {
    let region = RegionE::new(p)?;
    let crit = critical_points(p)?;
    let xi = combined_roots(region.roots(), &crit);
    let roots = region.roots().clone();
    let f = |z: Complex64| g1(&roots, &crit, z);
    integrate_over_e(&region, &f, &xi, budget)
}

/// `|L| = 2 * int_E |p'| - Re int_E (p|p'|/p') psi`; singular only at the
/// critical points.
pub fn length_area_v2(p: &Polynomial) -> Result<QuadratureResult, QuadError> {
    length_area_v2_with(p, &QuadBudget::default())
}

pub fn length_area_v2_with(
    p: &Polynomial,
    budget: &QuadBudget,
) -> Result<QuadratureResult, QuadError> {
    let region = RegionE::new(p)?;
    let crit = critical_points(p)?;
    let xi = combined_roots(region.roots(), &crit);
    let f = |z: Complex64| g2(p, &crit, z);
    integrate_over_e(&region, &f, &xi, budget)
}

/// `int_E |p'|^2` (which equals `pi n`) and `int_E |p'|` (at most `pi sqrt(n)`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushforwardReport {
    pub squared: QuadratureResult,
    pub absolute: QuadratureResult,
    pub expected_squared: f64,
    pub cauchy_bound: f64,
    pub identity_holds: bool,
    pub cauchy_holds: bool,
}

pub fn pushforward_check(p: &Polynomial) -> Result<PushforwardReport, QuadError> {
    pushforward_check_with(p, &QuadBudget::default(), 1e-2)
}

/// `rel_tol` is the accepted relative deviation from `pi n`.
pub fn pushforward_check_with(
    p: &Polynomial,
    budget: &QuadBudget,
    rel_tol: f64,
) -> Result<PushforwardReport, QuadError> {
    let region = RegionE::new(p)?;
    let xi = singular_points(p)?;
    let sq = |z: Complex64| Complex64::new(p.eval_jet(z).dp.norm_sqr(), 0.0);
    let ab = |z: Complex64| Complex64::new(p.eval_jet(z).dp.norm(), 0.0);
    let squared = integrate_over_e(&region, &sq, &xi, budget)?;
    let absolute = integrate_over_e(&region, &ab, &xi, budget)?;
    let n = p.degree() as f64;
    let expected_squared = PI * n;
    let cauchy_bound = PI * n.sqrt();
    Ok(PushforwardReport {
        identity_holds: (squared.value.re - expected_squared).abs()
            <= rel_tol * expected_squared + 3.0 * squared.error_estimate,
        cauchy_holds: absolute.value.re
            <= cauchy_bound * (1.0 + rel_tol) + 3.0 * absolute.error_estimate,
        squared,
        absolute,
        expected_squared,
        cauchy_bound,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaReport {
    pub area: QuadratureResult,
    pub limit: f64,
    pub violation: bool,
}

/// Area of `E` against the capacity bound `pi`.
pub fn area_capacity_check(p: &Polynomial) -> Result<AreaReport, QuadError> {
    area_capacity_check_with(p, &QuadBudget::default())
}

pub fn area_capacity_check_with(
    p: &Polynomial,
    budget: &QuadBudget,
) -> Result<AreaReport, QuadError> {
    let region = RegionE::new(p)?;
    let xi = singular_points(p)?;
    let one = |_: Complex64| Complex64::new(1.0, 0.0);
    let area = integrate_over_e(&region, &one, &xi, budget)?;
    let rel = area.error_estimate / area.value.re.abs().max(f64::MIN_POSITIVE);
    let limit = PI * (1.0 + 3.0 * rel);
    Ok(AreaReport {
        violation: area.value.re > limit,
        area,
        limit,
    })
}

/// `int_E sum_xi mult/|z - xi|` over the roots of `p p'`.
pub fn singular_mass(region: &RegionE) -> Result<QuadratureResult, QuadError> {
    singular_mass_with(region, &QuadBudget::default())
}

pub fn singular_mass_with(
    region: &RegionE,
    budget: &QuadBudget,
) -> Result<QuadratureResult, QuadError> {
    let xi = singular_points(region.polynomial())?;
    let f = |z: Complex64| -> Complex64 {
        Complex64::new(
            xi.roots
                .iter()
                .map(|r| r.multiplicity as f64 / (z - r.location).norm())
                .sum(),
            0.0,
        )
    };
    integrate_over_e(region, &f, &xi, budget)
}

/// The chain `|L| <= mass <= 2 pi (2n - 1)`, each side allowed its error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassChain {
    pub length: f64,
    pub mass: f64,
    pub bound: f64,
    pub length_below_mass: bool,
    pub mass_below_bound: bool,
}

pub fn singular_mass_chain(
    n: usize,
    length: f64,
    length_err: f64,
    mass: &QuadratureResult,
    rel_tol: f64,
) -> MassChain {
    let bound = 2.0 * PI * (2 * n - 1) as f64;
    let m = mass.value.re;
    MassChain {
        length,
        mass: m,
        bound,
        length_below_mass: length <= m + 3.0 * (length_err + mass.error_estimate),
        mass_below_bound: m <= bound * (1.0 + rel_tol) + 3.0 * mass.error_estimate,
    }
}
