//! Rational functions with all poles outside the closed unit disk.
//!
//! The canonical form is `num(z) / ∏ (1 − z/p)` over the poles `p`, so the
//! denominator always has constant coefficient 1. Common numerator and
//! denominator roots are cancelled at a relative tolerance of `1e-10`; this
//! cancellation is the only place where coefficient noise is introduced
//! beyond plain floating-point arithmetic.

use num_complex::Complex64;
use serde::Serialize;

use super::blaschke::BlaschkeProduct;
use super::disk::DiskPoint;
use super::poly;
use crate::error::{OplabError, Result};

pub const CANCEL_TOL: f64 = 1e-10;
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalFunction {
    #[serde(with = "crate::serde_ext::complex_vec")]
    num: Vec<Complex64>,
    #[serde(with = "crate::serde_ext::complex_vec")]
    den: Vec<Complex64>,
    #[serde(skip)]
    poles: Vec<Complex64>,
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= CANCEL_TOL * b.norm().max(1.0)
}

/// Pairs up entries of `a` and `b` that agree within the cancellation
/// tolerance. Returns the unmatched remainders of each list.
fn match_roots(a: &[Complex64], b: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let mut b_left: Vec<Complex64> = b.to_vec();
    let mut a_left = Vec::new();
    let mut matched = Vec::new();
    for &x in a {
        let best = b_left
            .iter()
            .enumerate()
            .map(|(k, &y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        match best {
            Some((k, _)) if close(x, b_left[k]) => {
                matched.push(b_left.swap_remove(k));
            }
            _ => a_left.push(x),
        }
    }
    (a_left, b_left, matched)
}

/// Divides `num` by `(1 − z/r)` for each `r`.
fn divide_reciprocal(mut num: Vec<Complex64>, roots: &[Complex64]) -> Vec<Complex64> {
    for &r in roots {
        num = poly::scale(&poly::deflate(&num, r), -r);
    }
    num
}

fn check_poles(poles: &[Complex64]) -> Result<()> {
    for p in poles {
        if !(p.norm() > 1.0) {
            return Err(OplabError::Invariant(format!(
                "rational function has a pole at {p} in the closed unit disk"
            )));
        }
    }
    Ok(())
}

impl RationalFunction {
    /// Builds `num / den` from ascending coefficient lists.
    pub fn from_coefficients(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        let den = poly::trim(den, 0.0);
        if poly::degree(&den).is_none() {
            return Err(OplabError::Invariant("zero denominator".into()));
        }
        if den[0] == ZERO {
            return Err(OplabError::Invariant(
                "denominator vanishes at the origin".into(),
            ));
        }
        let poles = poly::roots(&den);
        check_poles(&poles)?;
        let num = poly::scale(&num, ONE / den[0]);
        Self::from_parts(num, poles)
    }

    /// Like `from_coefficients` but keeps the given coefficients verbatim
    /// (up to normalising `den[0] = 1`) and skips cancellation. Evaluation
    /// then carries the accuracy of the inputs; the poles are only located
    /// for the disk check and for later algebra.
    pub fn from_coefficients_uncancelled(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        let den = poly::trim(den, 0.0);
        if poly::degree(&den).is_none() {
            return Err(OplabError::Invariant("zero denominator".into()));
        }
        if den[0] == ZERO {
            return Err(OplabError::Invariant("denominator vanishes at the origin".into()));
        }
        let poles = poly::roots(&den);
        check_poles(&poles)?;
        let num = poly::trim(poly::scale(&num, ONE / den[0]), 0.0);
        if num.is_empty() {
            return Ok(Self::zero());
        }
        let den = poly::scale(&den, ONE / den[0]);
        Ok(RationalFunction { num, den, poles })
    }

    /// Builds `num / ∏(1 − z/p)` and cancels common roots.
    pub fn from_parts(num: Vec<Complex64>, poles: Vec<Complex64>) -> Result<Self> {
        check_poles(&poles)?;
        let num = poly::trim(num, 0.0);
        if poly::degree(&num).is_none() {
            return Ok(Self::zero());
        }
        let (num, poles) = if poles.is_empty() {
            (num, poles)
        } else {
            let roots = poly::roots(&num);
            let (_, poles_left, matched) = match_roots(&roots, &poles);
            (divide_reciprocal(num, &matched), poles_left)
        };
        let den = poly::from_reciprocal_roots(&poles);
        Ok(RationalFunction { num, den, poles })
    }

    pub fn zero() -> Self {
        RationalFunction { num: Vec::new(), den: vec![ONE], poles: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        if c == ZERO {
            return Self::zero();
        }
        RationalFunction { num: vec![c], den: vec![ONE], poles: Vec::new() }
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        let num = poly::trim(coeffs, 0.0);
        RationalFunction { num, den: vec![ONE], poles: Vec::new() }
    }

    /// The function `z`.
    pub fn identity() -> Self {
        Self::polynomial(vec![ZERO, ONE])
    }

    /// `b_λ(z) = (|λ|/λ)(λ − z)/(1 − λ̄z)`, with `b_0(z) = z`.
    pub fn blaschke_factor(lambda: DiskPoint) -> Self {
        let l = lambda.value();
        if l == ZERO {
            return Self::identity();
        }
        let u = Complex64::new(l.norm(), 0.0) / l;
        RationalFunction {
            num: vec![u * l, -u],
            den: vec![ONE, -l.conj()],
            poles: vec![ONE / l.conj()],
        }
    }

    /// Cauchy–Szegő kernel `1/(1 − λ̄z)`.
    pub fn cauchy_kernel(lambda: DiskPoint) -> Self {
        let l = lambda.value();
        if l == ZERO {
            return Self::constant(ONE);
        }
        RationalFunction { num: vec![ONE], den: vec![ONE, -l.conj()], poles: vec![ONE / l.conj()] }
    }

    /// Finite Blaschke product as a single rational function.
    pub fn from_blaschke(b: &BlaschkeProduct) -> Self {
        let mut num = vec![ONE];
        let mut poles = Vec::new();
        for z in b.zeros() {
            let l = z.value();
            if l == ZERO {
                num = poly::mul(&num, &[ZERO, ONE]);
            } else {
                let u = Complex64::new(l.norm(), 0.0) / l;
                num = poly::mul(&num, &[u * l, -u]);
                poles.push(ONE / l.conj());
            }
        }
        let den = poly::from_reciprocal_roots(&poles);
        RationalFunction { num, den, poles }
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.num
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.den
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// Largest of numerator and denominator degree.
    pub fn degree(&self) -> usize {
        poly::degree(&self.num).unwrap_or(0).max(self.poles.len())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.num.is_empty() {
            return ZERO;
        }
        poly::eval(&self.num, z) / poly::eval(&self.den, z)
    }

    /// Analytic derivative by the quotient rule.
    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        if self.num.is_empty() {
            return ZERO;
        }
        let (p, dp) = poly::eval_with_derivative(&self.num, z);
        let (q, dq) = poly::eval_with_derivative(&self.den, z);
        (dp * q - p * dq) / (q * q)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == ZERO || self.is_zero() {
            return Self::zero();
        }
        RationalFunction { num: poly::scale(&self.num, s), den: self.den.clone(), poles: self.poles.clone() }
    }

    pub fn neg(&self) -> Self {
        self.scale(-ONE)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let (self_only, other_only, _) = match_roots(&self.poles, &other.poles);
        let left = poly::mul(&self.num, &poly::from_reciprocal_roots(&other_only));
        let right = poly::mul(&other.num, &poly::from_reciprocal_roots(&self_only));
        let scale = left
            .iter()
            .chain(right.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let mut num = poly::add(&left, &right);
        while num.last().is_some_and(|c| c.norm() <= 1e-14 * scale) {
            num.pop();
        }
        let mut poles = self.poles.clone();
        poles.extend(other_only);
        Self::from_parts(num, poles)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let cancel = |num: &[Complex64], poles: &[Complex64]| {
            if poles.is_empty() || num.len() <= 1 {
                return (num.to_vec(), poles.to_vec());
            }
            let roots = poly::roots(num);
            let (_, left, matched) = match_roots(&roots, poles);
            (divide_reciprocal(num.to_vec(), &matched), left)
        };
        let (a, other_poles) = cancel(&self.num, &other.poles);
        let (b, self_poles) = cancel(&other.num, &self.poles);
        let num = poly::mul(&a, &b);
        let mut poles = self_poles;
        poles.extend(other_poles);
        check_poles(&poles)?;
        let den = poly::from_reciprocal_roots(&poles);
        Ok(RationalFunction { num, den, poles })
    }

    /// Taylor coefficients at the origin, `count` terms.
    pub fn taylor_coefficients(&self, count: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; count];
        for k in 0..count {
            let mut c = self.num.get(k).copied().unwrap_or(ZERO);
            for (i, d) in self.den.iter().enumerate().skip(1) {
                if i > k {
                    break;
                }
                c -= d * out[k - i];
            }
            out[k] = c;
        }
        out
    }

    /// Maximum modulus over `points` equally spaced boundary samples.
    pub fn boundary_max(&self, points: usize) -> f64 {
        (0..points)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / points as f64;
                self.eval(Complex64::from_polar(1.0, t)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// `(φ(λ) − φ(μ))/(λ − μ)`, or `φ′(λ)` when `|λ − μ| ≤ 1e-10`.
pub fn divided_difference(phi: &RationalFunction, lambda: Complex64, mu: Complex64) -> Result<Complex64> {
    for p in [lambda, mu] {
        if p.norm() >= 1.0 {
            return Err(OplabError::Invariant(format!("{p} is not in the open disk")));
        }
    }
    if (lambda - mu).norm() > 1e-10 {
        Ok((phi.eval(lambda) - phi.eval(mu)) / (lambda - mu))
    } else {
        Ok(phi.derivative_at(lambda))
    }
}

/// Closed operations on rational functions. `Scale` multiplies the first
/// operand by a constant and ignores the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RationalOp {
    Add,
    Mul,
    Scale(Complex64),
}

pub fn rational_algebra(f: &RationalFunction, g: &RationalFunction, op: RationalOp) -> Result<RationalFunction> {
    match op {
        RationalOp::Add => f.add(g),
        RationalOp::Mul => f.mul(g),
        RationalOp::Scale(s) => Ok(f.scale(s)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn dp(x: f64) -> DiskPoint {
        DiskPoint::real(x).unwrap()
    }

    #[test]
    fn rejects_poles_in_disk() {
        assert!(RationalFunction::from_coefficients(vec![c(1.0)], vec![c(1.0), c(-2.0)]).is_err());
        assert!(RationalFunction::from_coefficients(vec![c(1.0)], vec![c(1.0), c(-1.0)]).is_err());
        assert!(RationalFunction::from_coefficients(vec![c(1.0)], vec![c(0.0), c(1.0)]).is_err());
        assert!(RationalFunction::from_coefficients(vec![c(1.0)], vec![]).is_err());
        assert!(RationalFunction::from_coefficients(vec![c(1.0)], vec![c(2.0), c(-1.0)]).is_ok());
    }

    #[test]
    fn identity_element_and_inverse() {
        let f = RationalFunction::blaschke_factor(dp(0.5));
        let one = RationalFunction::constant(c(1.0));
        let g = f.mul(&one).unwrap();
        assert_eq!(g, f);
        assert!(f.add(&f.neg()).unwrap().is_zero());
    }

    #[test]
    fn product_of_factors_has_exact_zeros() {
        let f = RationalFunction::blaschke_factor(dp(0.5))
            .mul(&RationalFunction::blaschke_factor(dp(0.25)))
            .unwrap();
        let mut zeros = poly::roots(f.numerator());
        zeros.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_eq!(zeros.len(), 2);
        assert!((zeros[0] - c(0.25)).norm() < 1e-14);
        assert!((zeros[1] - c(0.5)).norm() < 1e-14);
    }

    #[test]
    fn cancellation_of_common_factor() {
        // (0.5 − z)/(1 − 0.5z) is b_0.5 itself
        let f = RationalFunction::blaschke_factor(dp(0.5));
        let inv = RationalFunction::from_coefficients(vec![c(1.0), c(-0.5)], vec![c(0.5), c(-1.0)]);
        // the reciprocal has a pole at 0.5, so it is rejected
        assert!(inv.is_err());
        let g = RationalFunction::from_coefficients(vec![c(0.5), c(-1.0)], vec![c(1.0), c(-0.5)]).unwrap();
        let q = g.add(&f.neg()).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn uncancelled_keeps_coefficients() {
        let num = vec![c(0.5), c(-1.0)];
        let den = vec![c(2.0), c(-1.0)];
        let f = RationalFunction::from_coefficients_uncancelled(num.clone(), den.clone()).unwrap();
        assert_eq!(f.denominator(), &[c(1.0), c(-0.5)]);
        assert_eq!(f.poles().len(), 1);
        assert!((f.poles()[0] - c(2.0)).norm() < 1e-14);
        let z = Complex64::new(0.3, -0.6);
        let direct = (num[0] + num[1] * z) / (den[0] + den[1] * z);
        assert!((f.eval(z) - direct).norm() < 1e-15);
        assert!(RationalFunction::from_coefficients_uncancelled(vec![c(1.0)], vec![c(1.0), c(-2.0)]).is_err());
    }

    #[test]
    fn blaschke_derivative_at_own_zero() {
        let f = RationalFunction::blaschke_factor(dp(0.5));
        let exact = c(-1.0 / 0.75);
        let d = divided_difference(&f, c(0.5), c(0.5)).unwrap();
        assert!((d - exact).norm() < 1e-14);
        // finite-difference oracle
        let h = 1e-6;
        let fd = (f.eval(c(0.5 + h)) - f.eval(c(0.5 - h))) / (2.0 * h);
        assert!((fd - exact).norm() < 1e-8);
    }

    #[test]
    fn divided_difference_of_square() {
        let sq = RationalFunction::polynomial(vec![c(0.0), c(0.0), c(1.0)]);
        let (l, m) = (Complex64::new(0.2, 0.1), Complex64::new(-0.4, 0.3));
        assert!((divided_difference(&sq, l, m).unwrap() - (l + m)).norm() < 1e-15);
        assert!((divided_difference(&sq, l, l).unwrap() - 2.0 * l).norm() < 1e-15);
        assert!(divided_difference(&sq, c(1.0), m).is_err());
    }

    #[test]
    fn taylor_of_cauchy_kernel() {
        let k = RationalFunction::cauchy_kernel(dp(0.5));
        let t = k.taylor_coefficients(5);
        for (n, v) in t.iter().enumerate() {
            assert!((v - c(0.5f64.powi(n as i32))).norm() < 1e-15);
        }
    }

    fn small_point() -> impl Strategy<Value = DiskPoint> {
        (0.0f64..0.9, 0.0f64..std::f64::consts::TAU)
            .prop_map(|(r, t)| DiskPoint::new(Complex64::from_polar(r, t)).unwrap())
    }

    fn rational() -> impl Strategy<Value = RationalFunction> {
        (small_point(), small_point(), -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, s, t)| {
            let f = RationalFunction::blaschke_factor(a)
                .mul(&RationalFunction::cauchy_kernel(b))
                .unwrap();
            f.add(&RationalFunction::constant(Complex64::new(s, t))).unwrap()
        })
    }

    /// `f ≡ g` as functions: `num_f · den_g − num_g · den_f` vanishes.
    fn same_function(f: &RationalFunction, g: &RationalFunction) -> bool {
        let lhs = poly::mul(f.numerator(), g.denominator());
        let rhs = poly::mul(g.numerator(), f.denominator());
        let diff = poly::add(&lhs, &poly::scale(&rhs, c(-1.0)));
        let scale = lhs.iter().chain(&rhs).map(|z| z.norm()).fold(1.0, f64::max);
        diff.iter().all(|z| z.norm() <= 1e-10 * scale)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn add_and_mul_commute(f in rational(), g in rational()) {
            prop_assert!(same_function(&f.add(&g).unwrap(), &g.add(&f).unwrap()));
            prop_assert!(same_function(&f.mul(&g).unwrap(), &g.mul(&f).unwrap()));
        }

        #[test]
        fn add_and_mul_associate(f in rational(), g in rational(), h in rational()) {
            let l = f.add(&g).unwrap().add(&h).unwrap();
            let r = f.add(&g.add(&h).unwrap()).unwrap();
            prop_assert!(same_function(&l, &r));
            let l = f.mul(&g).unwrap().mul(&h).unwrap();
            let r = f.mul(&g.mul(&h).unwrap()).unwrap();
            prop_assert!(same_function(&l, &r));
        }
    }
}
