use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::disk::DiskPoint;
use crate::error::{OplabError, Result};

/// Zeros closer to the circle than this are rejected.
pub const MAX_ZERO_MODULUS: f64 = 1.0 - 1e-6;
const POLE_PROXIMITY: f64 = 1e-14;

/// Finite Blaschke product `θ = ∏ b_{λ_n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    zeros: Vec<DiskPoint>,
    #[serde(default)]
    label: String,
}

impl BlaschkeProduct {
    /// Simple-zero product; zeros must be pairwise distinct.
    pub fn new(zeros: Vec<DiskPoint>) -> Result<Self> {
        for (i, a) in zeros.iter().enumerate() {
            if zeros[..i].iter().any(|b| b == a) {
                return Err(OplabError::Invariant(format!(
                    "repeated zero {} in simple-zero mode",
                    a.value()
                )));
            }
        }
        Self::allowing_repeats(zeros)
    }

    /// Product whose zeros may repeat (multiplicity counted by repetition).
    pub fn allowing_repeats(zeros: Vec<DiskPoint>) -> Result<Self> {
        if let Some(z) = zeros.iter().find(|z| z.modulus() > MAX_ZERO_MODULUS) {
            return Err(OplabError::Invariant(format!(
                "zero {} is within 1e-6 of the unit circle",
                z.value()
            )));
        }
        Ok(BlaschkeProduct { zeros, label: String::new() })
    }

    pub fn from_complex(zeros: &[Complex64]) -> Result<Self> {
        let pts = zeros.iter().map(|&z| DiskPoint::new(z)).collect::<Result<Vec<_>>>()?;
        Self::new(pts)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn zeros(&self) -> &[DiskPoint] {
        &self.zeros
    }

    pub fn zero_values(&self) -> Vec<Complex64> {
        self.zeros.iter().map(DiskPoint::value).collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// The product with the `n`-th zero removed (`B_n`).
    pub fn without(&self, n: usize) -> BlaschkeProduct {
        let mut zeros = self.zeros.clone();
        zeros.remove(n);
        BlaschkeProduct { zeros, label: format!("{}_{n}", self.label) }
    }

    fn check_pole(lambda: Complex64, z: Complex64) -> Result<()> {
        if (Complex64::new(1.0, 0.0) - lambda.conj() * z).norm() < POLE_PROXIMITY {
            return Err(OplabError::Degenerate(format!(
                "evaluation point {z} sits on the pole of the factor at {lambda}"
            )));
        }
        Ok(())
    }

    /// `θ(z)` for `|z| ≤ 1`, accumulated as log-modulus plus argument so
    /// that long products do not underflow before the final exponential.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut log_mod = 0.0;
        let mut arg = 0.0;
        for lam in &self.zeros {
            let l = lam.value();
            Self::check_pole(l, z)?;
            let f = factor(l, z);
            if f == Complex64::new(0.0, 0.0) {
                return Ok(f);
            }
            log_mod += f.norm().ln();
            arg += f.arg();
        }
        Ok(Complex64::from_polar(log_mod.exp(), arg))
    }

    /// `ln |θ(z)|`; `-inf` at a zero.
    pub fn log_modulus(&self, z: Complex64) -> Result<f64> {
        let mut acc = 0.0;
        for lam in &self.zeros {
            Self::check_pole(lam.value(), z)?;
            acc += factor(lam.value(), z).norm().ln();
        }
        Ok(acc)
    }
}

/// Single factor `b_λ(z)`, with `b_0(z) = z`.
pub fn factor(lambda: Complex64, z: Complex64) -> Complex64 {
    if lambda == Complex64::new(0.0, 0.0) {
        return z;
    }
    let unimodular = Complex64::new(lambda.norm(), 0.0) / lambda;
    unimodular * (lambda - z) / (Complex64::new(1.0, 0.0) - lambda.conj() * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn own_zero_and_origin() {
        let b = BlaschkeProduct::from_complex(&[c(0.5)]).unwrap();
        assert_eq!(b.eval(c(0.5)).unwrap(), c(0.0));
        assert!((b.eval(c(0.0)).unwrap() - c(0.5)).norm() < 1e-15);
        assert_eq!(b.log_modulus(c(0.5)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn zero_at_origin_convention() {
        let b = BlaschkeProduct::from_complex(&[c(0.0)]).unwrap();
        let z = Complex64::new(0.3, -0.2);
        assert_eq!(b.eval(z).unwrap(), z);
    }

    #[test]
    fn rejects_repeats_and_near_boundary() {
        assert!(BlaschkeProduct::from_complex(&[c(0.5), c(0.5)]).is_err());
        assert!(BlaschkeProduct::from_complex(&[c(1.0 - 1e-7)]).is_err());
        let p = DiskPoint::real(0.5).unwrap();
        assert_eq!(BlaschkeProduct::allowing_repeats(vec![p, p]).unwrap().len(), 2);
    }

    #[test]
    fn pole_proximity_is_degenerate() {
        let b = BlaschkeProduct::from_complex(&[c(0.5)]).unwrap();
        assert!(matches!(b.eval(c(2.0)), Err(OplabError::Degenerate(_))));
    }

    #[test]
    fn many_factors_do_not_underflow_in_log_space() {
        let zeros: Vec<Complex64> = (0..400).map(|k| Complex64::from_polar(0.9, k as f64 * 0.0157)).collect();
        let b = BlaschkeProduct::from_complex(&zeros).unwrap();
        let lm = b.log_modulus(c(0.0)).unwrap();
        assert!((lm - 400.0 * 0.9f64.ln()).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn unimodular_on_circle(
            zeros in proptest::collection::vec((0.0f64..0.999, 0.0f64..std::f64::consts::TAU), 1..12),
            t in 0.0f64..std::f64::consts::TAU,
        ) {
            let zs: Vec<Complex64> = zeros.iter().map(|&(r, a)| Complex64::from_polar(r, a)).collect();
            let b = BlaschkeProduct::allowing_repeats(
                zs.iter().map(|&z| DiskPoint::new(z).unwrap()).collect()
            ).unwrap();
            let v = b.eval(Complex64::from_polar(1.0, t)).unwrap();
            prop_assert!((v.norm() - 1.0).abs() < 1e-10);
        }
    }
}
