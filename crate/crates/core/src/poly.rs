//! Monic complex polynomials, fused evaluation with derivatives, and the
//! logarithmic derivatives `phi = p'/p` and `psi = p''/p'`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Values below this modulus are treated as zeros of `p` or `p'` when forming
/// the logarithmic derivatives.
pub const POLE_FLOOR: f64 = 1e-13;

const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("polynomial must have degree at least 1")]
    DegreeTooLow,
    #[error("leading coefficient must be exactly 1, got {0}")]
    NotMonic(Complex64),
    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },
    #[error("p(z) vanishes at z = {0} (pole of p'/p)")]
    PoleAtRoot(Complex64),
    #[error("p'(z) vanishes at z = {0} (pole of p''/p')")]
    PoleAtCriticalPoint(Complex64),
    #[error("the constant perturbation coefficient must be real, got {0}")]
    NonRealConstant(Complex64),
    #[error("expected {expected} perturbation coefficients (a_2..a_n), got {got}")]
    WrongCoefficientCount { expected: usize, got: usize },
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

/// Values of `p`, `p'` and `p''` at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetValue {
    pub p: Complex64,
    pub dp: Complex64,
    pub ddp: Complex64,
}

/// A monic polynomial `c_0 + c_1 z + ... + z^n`, coefficients stored in
/// ascending order with `c_n = 1` held explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl TryFrom<Vec<Complex64>> for Polynomial {
    type Error = PolyError;

    fn try_from(coeffs: Vec<Complex64>) -> Result<Self, Self::Error> {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<Complex64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, PolyError> {
        if coeffs.len() < 2 {
            return Err(PolyError::DegreeTooLow);
        }
        if let Some(index) = coeffs
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(PolyError::NonFinite { index });
        }
        let lead = *coeffs.last().unwrap();
        if lead != Complex64::new(1.0, 0.0) {
            return Err(PolyError::NotMonic(lead));
        }
        Ok(Polynomial { coeffs })
    }

    /// Builds a monic polynomial from leading-normalised coefficients of any
    /// scale by dividing through by the top coefficient.
    pub fn normalized(mut coeffs: Vec<Complex64>) -> Result<Self, PolyError> {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == Complex64::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(PolyError::DegreeTooLow);
        }
        let lead = *coeffs.last().unwrap();
        for c in coeffs.iter_mut() {
            *c /= lead;
        }
        *coeffs.last_mut().unwrap() = Complex64::new(1.0, 0.0);
        Polynomial::new(coeffs)
    }

    /// `z^n`
    pub fn monomial(n: usize) -> Self {
        assert!(n >= 1, "degree must be at least 1");
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Polynomial { coeffs }
    }

    /// `z^n - 1`, the conjectured maximiser of the lemniscate length.
    pub fn unit_roots(n: usize) -> Self {
        let mut p = Self::monomial(n);
        p.coeffs[0] = Complex64::new(-1.0, 0.0);
        p
    }

    /// `prod (z - r)` over the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        assert!(!roots.is_empty(), "need at least one root");
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= r * c;
            }
            coeffs = next;
        }
        Polynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `p + c`
    pub fn add_constant(&self, c: Complex64) -> Self {
        let mut q = self.clone();
        q.coeffs[0] += c;
        q
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// `p(z)`, `p'(z)` and `p''(z)` in one Horner pass.
    pub fn eval_jet(&self, z: Complex64) -> JetValue {
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut dp, mut ddp) = (zero, zero, zero);
        for &c in self.coeffs.iter().rev() {
            ddp = ddp * z + dp;
            dp = dp * z + p;
            p = p * z + c;
        }
        JetValue {
            p,
            dp,
            ddp: ddp * 2.0,
        }
    }

    /// Running-error style bound on the rounding error of `eval(z)`.
    pub fn eval_error_bound(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * r + c.norm();
        }
        4.0 * (self.degree() as f64 + 1.0) * EPS * acc
    }

    /// Coefficients of `p'`, ascending; not monic.
    pub fn derivative_coeffs(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect()
    }

    /// `p' / n`, which shares its roots with `p'`. `None` when `n = 1`.
    pub fn monic_derivative(&self) -> Option<Polynomial> {
        if self.degree() < 2 {
            return None;
        }
        let n = self.degree() as f64;
        let coeffs = self
            .derivative_coeffs()
            .into_iter()
            .map(|c| c / n)
            .collect::<Vec<_>>();
        let mut d = Polynomial { coeffs };
        *d.coeffs.last_mut().unwrap() = Complex64::new(1.0, 0.0);
        Some(d)
    }

    /// Taylor coefficients of `t -> p(z0 + t*dir)`, ascending in `t`.
    pub fn taylor_along(&self, z0: Complex64, dir: Complex64) -> Vec<Complex64> {
        // repeated synthetic division gives the Taylor coefficients at z0
        let n = self.degree();
        let mut work = self.coeffs.clone();
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        for k in 0..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in (k..=n).rev() {
                acc = acc * z0 + work[j];
                work[j] = acc;
            }
            out[k] = work[k];
        }
        let mut scale = Complex64::new(1.0, 0.0);
        for c in out.iter_mut() {
            *c *= scale;
            scale *= dir;
        }
        out
    }

    /// Largest root modulus bound (Cauchy).
    pub fn cauchy_bound(&self) -> f64 {
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for Polynomial {
    /// `n; re,im; re,im; ...` with coefficients ascending.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degree())?;
        for c in &self.coeffs {
            write!(f, "; {:?},{:?}", c.re, c.im)?;
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split(';').map(str::trim).filter(|p| !p.is_empty());
        let head = parts
            .next()
            .ok_or_else(|| PolyError::Parse("empty input".into()))?;
        let n: usize = head
            .parse()
            .map_err(|_| PolyError::Parse(format!("bad degree `{head}`")))?;
        let mut coeffs = Vec::with_capacity(n + 1);
        for part in parts {
            let (re, im) = part
                .split_once(',')
                .ok_or_else(|| PolyError::Parse(format!("coefficient `{part}` is not `re,im`")))?;
            let re: f64 = re
                .trim()
                .parse()
                .map_err(|_| PolyError::Parse(format!("bad real part `{re}`")))?;
            let im: f64 = im
                .trim()
                .parse()
                .map_err(|_| PolyError::Parse(format!("bad imaginary part `{im}`")))?;
            coeffs.push(Complex64::new(re, im));
        }
        if coeffs.len() != n + 1 {
            return Err(PolyError::Parse(format!(
                "degree {n} needs {} coefficients, got {}",
                n + 1,
                coeffs.len()
            )));
        }
        Polynomial::new(coeffs)
    }
}

/// `p'(z) / p(z)`.
pub fn phi(p: &Polynomial, z: Complex64) -> Result<Complex64, PolyError> {
    let j = p.eval_jet(z);
    if j.p.norm() < POLE_FLOOR {
        return Err(PolyError::PoleAtRoot(z));
    }
    Ok(j.dp / j.p)
}

/// `p''(z) / p'(z)`.
pub fn psi(p: &Polynomial, z: Complex64) -> Result<Complex64, PolyError> {
    let j = p.eval_jet(z);
    if j.dp.norm() < POLE_FLOOR {
        return Err(PolyError::PoleAtCriticalPoint(z));
    }
    Ok(j.ddp / j.dp)
}

/// `z^n - 1 + sum_{k=2}^n a_k z^{n-k}`; `a` holds `a_2..a_n` and `a_n` must be real.
pub fn perturbed_family(n: usize, a: &[Complex64]) -> Result<Polynomial, PolyError> {
    if n < 2 {
        return Err(PolyError::DegreeTooLow);
    }
    if a.len() != n - 1 {
        return Err(PolyError::WrongCoefficientCount {
            expected: n - 1,
            got: a.len(),
        });
    }
    let a_n = a[n - 2];
    if a_n.im != 0.0 {
        return Err(PolyError::NonRealConstant(a_n));
    }
    let mut p = Polynomial::unit_roots(n);
    for (i, &ak) in a.iter().enumerate() {
        let k = i + 2;
        p.coeffs[n - k] += ak;
    }
    Polynomial::new(p.coeffs)
}

/// `max_k |a_k|^{1/k}` over `a_2..`; the entry at index `i` is `a_{i+2}`.
pub fn scale_param(a: &[Complex64]) -> f64 {
    a.iter()
        .enumerate()
        .map(|(i, ak)| ak.norm().powf(1.0 / (i + 2) as f64))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn z2m1() -> Polynomial {
        Polynomial::unit_roots(2)
    }

    #[test]
    fn jet_of_z2_minus_1() {
        let j = z2m1().eval_jet(c(1.0, 1.0));
        assert_eq!(j.p, c(-1.0, 2.0));
        assert_eq!(j.dp, c(2.0, 2.0));
        assert_eq!(j.ddp, c(2.0, 0.0));
    }

    #[test]
    fn jet_of_monomial_at_one() {
        for n in 1..8 {
            let j = Polynomial::monomial(n).eval_jet(c(1.0, 0.0));
            assert_eq!(j.p, c(1.0, 0.0));
            assert_eq!(j.dp, c(n as f64, 0.0));
            assert_eq!(j.ddp, c((n * (n - 1)) as f64, 0.0));
        }
    }

    #[test]
    fn jet_of_z3_minus_1_at_origin() {
        let j = Polynomial::unit_roots(3).eval_jet(c(0.0, 0.0));
        assert_eq!(j.p, c(-1.0, 0.0));
        assert_eq!(j.dp, c(0.0, 0.0));
        assert_eq!(j.ddp, c(0.0, 0.0));
    }

    #[test]
    fn phi_examples() {
        for n in 1..6 {
            let v = phi(&Polynomial::monomial(n), c(2.0, 0.0)).unwrap();
            assert!((v - c(n as f64 / 2.0, 0.0)).norm() < 1e-15);
        }
        let v = phi(&z2m1(), c(0.0, 2.0)).unwrap();
        assert!((v - c(0.0, -0.8)).norm() < 1e-15);
        assert!(matches!(
            phi(&z2m1(), c(1.0, 0.0)),
            Err(PolyError::PoleAtRoot(_))
        ));
    }

    #[test]
    fn psi_examples() {
        for n in 2..6 {
            let v = psi(&Polynomial::monomial(n), c(3.0, 0.0)).unwrap();
            assert!((v - c((n - 1) as f64 / 3.0, 0.0)).norm() < 1e-15);
        }
        assert!((psi(&z2m1(), c(1.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            psi(&z2m1(), c(0.0, 0.0)),
            Err(PolyError::PoleAtCriticalPoint(_))
        ));
    }

    #[test]
    fn perturbed_family_examples() {
        let p = perturbed_family(3, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(p, Polynomial::unit_roots(3));

        let p = perturbed_family(2, &[c(0.1, 0.0)]).unwrap();
        assert_eq!(p.coeffs(), &[c(-0.9, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);

        let p = perturbed_family(3, &[c(0.0, 0.01), c(0.02, 0.0)]).unwrap();
        assert_eq!(p.coeffs()[0], c(0.02 - 1.0, 0.0));
        assert_eq!(p.coeffs()[1], c(0.0, 0.01));
        assert_eq!(p.coeffs()[2], c(0.0, 0.0));
    }

    #[test]
    fn perturbed_family_rejects_bad_input() {
        assert!(matches!(
            perturbed_family(3, &[c(0.0, 0.0), c(0.0, 0.1)]),
            Err(PolyError::NonRealConstant(_))
        ));
        // supplying a_1 shows up as one coefficient too many
        assert!(matches!(
            perturbed_family(3, &[c(0.1, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            Err(PolyError::WrongCoefficientCount { .. })
        ));
    }

    #[test]
    fn scale_param_examples() {
        assert!((scale_param(&[c(0.04, 0.0), c(0.0, 0.0)]) - 0.2).abs() < 1e-15);
        assert_eq!(scale_param(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]), 0.0);
        assert!((scale_param(&[c(0.01, 0.0), c(0.008, 0.0)]) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn monic_invariant_is_enforced() {
        assert!(matches!(
            Polynomial::new(vec![c(1.0, 0.0), c(2.0, 0.0)]),
            Err(PolyError::NotMonic(_))
        ));
        assert!(matches!(
            Polynomial::new(vec![c(1.0, 0.0)]),
            Err(PolyError::DegreeTooLow)
        ));
        assert!(matches!(
            Polynomial::new(vec![c(f64::NAN, 0.0), c(1.0, 0.0)]),
            Err(PolyError::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn text_format_round_trip_and_rejection() {
        let p: Polynomial = "2; -1,0; 0,0; 1,0".parse().unwrap();
        assert_eq!(p, z2m1());
        let back: Polynomial = p.to_string().parse().unwrap();
        assert_eq!(back, p);
        assert!(matches!(
            "2; -1,0; 0,0; 2,0".parse::<Polynomial>(),
            Err(PolyError::NotMonic(_))
        ));
        assert!(matches!(
            "2; -1,0; 1,0".parse::<Polynomial>(),
            Err(PolyError::Parse(_))
        ));
        assert!(matches!(
            "x; 1,0".parse::<Polynomial>(),
            Err(PolyError::Parse(_))
        ));
    }

    #[test]
    fn taylor_along_matches_direct_evaluation() {
        let p = Polynomial::from_roots(&[c(0.3, 0.1), c(-0.2, 0.4), c(0.1, -0.5)]);
        let z0 = c(0.7, -0.2);
        let dir = c(0.6, 0.8);
        let t = p.taylor_along(z0, dir);
        for &s in &[-1.3, 0.0, 0.4, 2.0] {
            let direct = p.eval(z0 + dir * s);
            let mut acc = c(0.0, 0.0);
            for &k in t.iter().rev() {
                acc = acc * s + k;
            }
            assert!((direct - acc).norm() < 1e-12);
        }
    }
}
