//! Simultaneous (Aberth–Ehrlich) root finding with Newton polishing, a
//! companion-matrix fallback, and multiplicity clustering.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Polynomial;

const EPS: f64 = f64::EPSILON;
const MAX_ABERTH_ITERS: usize = 600;
const MIN_CLUSTER_RADIUS: f64 = 1e-7;

/// Default residual tolerance used by the higher-level modules.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("root finder did not converge (worst scaled residual {worst_residual:e})")]
    NonConvergence { worst_residual: f64 },
    #[error("tolerance must be positive")]
    BadTolerance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    OfP,
    OfPPrime,
    OfPPrimeCombined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub location: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub kind: RootKind,
    /// Largest `|q(r)|` over the reported roots.
    pub residual_bound: f64,
}

impl RootSet {
    pub fn empty(kind: RootKind) -> Self {
        RootSet {
            roots: Vec::new(),
            kind,
            residual_bound: 0.0,
        }
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn locations(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.location).collect()
    }

    /// Every root repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.location, r.multiplicity))
            .collect()
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots
            .iter()
            .map(|r| r.location.norm())
            .fold(0.0, f64::max)
    }
}

/// All complex roots of the monic polynomial `q`, clustered by multiplicity.
///
/// A root is accepted when `|q(r)| <= tol * sum |c_k| |r|^k`, i.e. the residual
/// is measured against the evaluation scale at `r`.
pub fn find_roots(q: &Polynomial, kind: RootKind, tol: f64) -> Result<RootSet, RootError> {
    if !(tol > 0.0) {
        return Err(RootError::BadTolerance);
    }
    let n = q.degree();
    let raw = if n == 1 {
        vec![-q.coeffs()[0]]
    } else {
        match aberth(q) {
            Some(z) => z,
            None => companion_eigenvalues(q),
        }
    };
    let raw: Vec<Complex64> = raw.into_iter().map(|z| polish(q, z)).collect();
    let roots = cluster(q, &raw, tol);

    let mut residual_bound: f64 = 0.0;
    let mut worst_scaled: f64 = 0.0;
    for r in &roots {
        let res = q.eval(r.location).norm();
        residual_bound = residual_bound.max(res);
        worst_scaled = worst_scaled.max(res / eval_scale(q, r.location));
    }
    if worst_scaled > tol || roots.iter().map(|r| r.multiplicity).sum::<usize>() != n {
        return Err(RootError::NonConvergence {
            worst_residual: worst_scaled,
        });
    }
    Ok(RootSet {
        roots,
        kind,
        residual_bound,
    })
}

/// Roots of `p`.
pub fn roots_of(p: &Polynomial) -> Result<RootSet, RootError> {
    find_roots(p, RootKind::OfP, DEFAULT_ROOT_TOL)
}

/// Roots of `p'` (critical points); empty for linear `p`.
pub fn critical_points(p: &Polynomial) -> Result<RootSet, RootError> {
    match p.monic_derivative() {
        Some(d) => find_roots(&d, RootKind::OfPPrime, DEFAULT_ROOT_TOL),
        None => Ok(RootSet::empty(RootKind::OfPPrime)),
    }
}

/// Roots of `p p'`, merging points shared by both factors.
pub fn combined_roots(roots: &RootSet, crit: &RootSet) -> RootSet {
    let mut merged: Vec<Root> = roots.roots.clone();
    for c in &crit.roots {
        match merged.iter_mut().find(|r| {
            (r.location - c.location).norm() <= MIN_CLUSTER_RADIUS * (1.0 + r.location.norm())
        }) {
            Some(r) => r.multiplicity += c.multiplicity,
            None => merged.push(*c),
        }
    }
    RootSet {
        roots: merged,
        kind: RootKind::OfPPrimeCombined,
        residual_bound: roots.residual_bound.max(crit.residual_bound),
    }
}

fn eval_scale(q: &Polynomial, z: Complex64) -> f64 {
    let r = z.norm();
    q.coeffs()
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * r + c.norm())
        .max(1.0)
}

fn aberth(q: &Polynomial) -> Option<Vec<Complex64>> {
    let n = q.degree();
    let coeffs = q.coeffs();
    let center = -coeffs[n - 1] / n as f64;
    // radius from the Fujiwara-type bound of the shifted polynomial
    let shifted = q.taylor_along(center, Complex64::new(1.0, 0.0));
    let radius = (0..n)
        .map(|k| shifted[k].norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            center + Complex64::from_polar(radius, angle)
        })
        .collect();
    let mut done = vec![false; n];
    for _ in 0..MAX_ABERTH_ITERS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let jet = q.eval_jet(z[i]);
            if jet.p.norm() <= 2.0 * q.eval_error_bound(z[i]) {
                done[i] = true;
                continue;
            }
            all_done = false;
            if jet.dp.norm() == 0.0 {
                let bump = Complex64::new(1e-8, 1e-8) * (1.0 + z[i].norm());
                z[i] += bump;
                continue;
            }
            let ratio = jet.p / jet.dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() > 0.0 {
                        s += d.inv();
                    }
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if !(w.re.is_finite() && w.im.is_finite()) {
                return None;
            }
            z[i] -= w;
            if w.norm() <= 4.0 * EPS * (1.0 + z[i].norm()) {
                done[i] = true;
            }
        }
        if all_done {
            return Some(z);
        }
    }
    None
}

fn companion_eigenvalues(q: &Polynomial) -> Vec<Complex64> {
    let n = q.degree();
    let c = q.coeffs();
    let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
        if i == 0 {
            -c[n - 1 - j]
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    match m.eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => vec![Complex64::new(f64::NAN, f64::NAN); n],
    }
}

/// A few Newton steps, kept only while the residual shrinks.
fn polish(q: &Polynomial, mut z: Complex64) -> Complex64 {
    let mut res = q.eval(z).norm();
    for _ in 0..4 {
        let jet = q.eval_jet(z);
        if jet.dp.norm() == 0.0 {
            break;
        }
        let cand = z - jet.p / jet.dp;
        let cand_res = q.eval(cand).norm();
        if cand_res < res {
            z = cand;
            res = cand_res;
        } else {
            break;
        }
    }
    z
}

/// Groups computed roots whose spread is consistent with a multiple root:
/// `m` roots are merged when they all lie within `max(1e-7, tol^(1/m))` of
/// their centroid.
fn cluster(q: &Polynomial, raw: &[Complex64], tol: f64) -> Vec<Root> {
    let n = raw.len();
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for m in (2..=n).rev() {
        let radius = MIN_CLUSTER_RADIUS.max(tol.powf(1.0 / m as f64));
        for i in 0..n {
            if assigned[i] {
                continue;
            }
            let mut near: Vec<(f64, usize)> = (0..n)
                .filter(|&j| !assigned[j])
                .map(|j| ((raw[j] - raw[i]).norm(), j))
                .collect();
            if near.len() < m {
                continue;
            }
            near.sort_by(|a, b| a.0.total_cmp(&b.0));
            let members: Vec<usize> = near[..m].iter().map(|&(_, j)| j).collect();
            let centroid = members.iter().map(|&j| raw[j]).sum::<Complex64>() / m as f64;
            let scale = 1.0 + centroid.norm();
            if members
                .iter()
                .all(|&j| (raw[j] - centroid).norm() <= radius * scale)
            {
                for &j in &members {
                    assigned[j] = true;
                }
                let location = polish_multiple(q, centroid, m);
                out.push(Root {
                    location,
                    multiplicity: m,
                });
            }
        }
    }
    for i in 0..n {
        if !assigned[i] {
            out.push(Root {
                location: raw[i],
                multiplicity: 1,
            });
        }
    }
    out.sort_by(|a, b| {
        a.location
            .re
            .total_cmp(&b.location.re)
            .then(a.location.im.total_cmp(&b.location.im))
    });
    out
}

/// Modified Newton for a root of known multiplicity; kept only if it helps.
fn polish_multiple(q: &Polynomial, mut z: Complex64, m: usize) -> Complex64 {
    // the (m-1)-th derivative has a simple root at a root of multiplicity m
    let mut d = q.coeffs().to_vec();
    for _ in 0..m - 1 {
        d = d
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
    }
    let eval = |coeffs: &[Complex64], z: Complex64| -> (Complex64, Complex64) {
        let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let mut res = eval(&d, z).0.norm();
    for _ in 0..4 {
        let (v, dv) = eval(&d, z);
        if dv.norm() == 0.0 {
            break;
        }
        let cand = z - v / dv;
        let cand_res = eval(&d, cand).0.norm();
        if cand_res < res && q.eval(cand).norm() <= q.eval(z).norm().max(q.eval_error_bound(cand)) {
            z = cand;
            res = cand_res;
        } else {
            break;
        }
    }
    z
}
