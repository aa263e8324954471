//! Functional calculus for polynomials and rational functions.

use num_complex::Complex64;

use super::Operator;
use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::scalar_fn::{BlaschkeProduct, RationalFunction};

const RADIUS_TOL: f64 = 1e-10;

fn check_spectrum(t: &Operator) -> Result<()> {
    let rho = t.spectral_radius();
    if !(rho < 1.0 - RADIUS_TOL) {
        return Err(OplabError::Spectral(format!(
            "spectral radius {rho:.12} is not below 1"
        )));
    }
    Ok(())
}

/// `(|λ|/λ)(λI − T)(I − λ̄T)⁻¹ X`, or `T X` for `λ = 0`.
fn apply_factor(lambda: Complex64, t: &CMat, x: &CMat) -> Result<CMat> {
    let n = t.nrows();
    if lambda == ZERO {
        return Ok(t * x);
    }
    let unimodular = Complex64::new(lambda.norm(), 0.0) / lambda;
    let mut den = -t * lambda.conj();
    let mut num = -t.clone();
    for i in 0..n {
        den[(i, i)] += ONE;
        num[(i, i)] += lambda;
    }
    // (λ − T) and (I − λ̄T)⁻¹ commute, so the solve may come first
    let solved = linalg::solve(&den, x).map_err(|_| {
        OplabError::Spectral(format!("I − conj({lambda})·T is singular"))
    })?;
    Ok(num * solved * unimodular)
}

/// `θ(T)` for a finite Blaschke product, one factor solve at a time in
/// the order the zeros are listed.
pub fn blaschke_of_operator(b: &BlaschkeProduct, t: &Operator) -> Result<Operator> {
    check_spectrum(t)?;
    blaschke_of_matrix_ordered(b.zero_values().into_iter(), t)
}

pub(crate) fn blaschke_of_matrix_ordered(zeros: impl Iterator<Item = Complex64>, t: &CMat) -> Result<Operator> {
    let mut x = linalg::identity(t.nrows());
    for lambda in zeros {
        x = apply_factor(lambda, t, &x)?;
    }
    Operator::new(x)
}

/// Same as `blaschke_of_operator` with the factors applied in reverse order.
pub fn blaschke_of_operator_reversed(b: &BlaschkeProduct, t: &Operator) -> Result<Operator> {
    check_spectrum(t)?;
    blaschke_of_matrix_ordered(b.zero_values().into_iter().rev(), t)
}

/// `p(T)` by Horner's rule, ascending coefficients.
pub fn poly_of_operator(coeffs: &[Complex64], t: &Operator) -> Operator {
    Operator(linalg::poly_of_matrix(coeffs, t))
}

/// `φ(T) = num(T) ∏ (I − T/p)⁻¹` for a rational `φ` with poles `p` outside
/// the closed disk.
pub fn rational_of_operator(phi: &RationalFunction, t: &Operator) -> Result<Operator> {
    check_spectrum(t)?;
    let n = t.dim();
    let mut x = linalg::poly_of_matrix(phi.numerator(), t);
    for &p in phi.poles() {
        let mut den = -(t.matrix() / p);
        for i in 0..n {
            den[(i, i)] += ONE;
        }
        x = linalg::solve(&den, &x)?;
    }
    Operator::new(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_fn::DiskPoint;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn annihilation_on_diagonal() {
        let zs = [c(0.5), Complex64::new(-0.2, 0.6), c(0.0), Complex64::new(0.1, -0.9)];
        let b = BlaschkeProduct::from_complex(&zs).unwrap();
        let t = Operator::diagonal(&zs);
        assert!(blaschke_of_operator(&b, &t).unwrap().norm() < 1e-14);
    }

    #[test]
    fn scalar_examples() {
        let b = BlaschkeProduct::from_complex(&[c(0.5)]).unwrap();
        let r = blaschke_of_operator(&b, &Operator::zeros(3)).unwrap();
        assert!(linalg::max_abs_diff(&r, &(linalg::identity(3) * c(0.5))) < 1e-15);
        let r = blaschke_of_operator(&b, &Operator::diagonal(&[c(0.3)])).unwrap();
        let oracle = b.eval(c(0.3)).unwrap();
        assert!((r[(0, 0)] - oracle).norm() < 1e-15);
    }

    #[test]
    fn zero_at_origin_is_identity_map() {
        let t = Operator::new(CMat::from_fn(3, 3, |i, j| c(0.1 * (i as f64 - j as f64) + 0.05))).unwrap();
        let b = BlaschkeProduct::from_complex(&[c(0.0)]).unwrap();
        let via_b = blaschke_of_operator(&b, &t).unwrap();
        let via_p = poly_of_operator(&[c(0.0), c(1.0)], &t);
        assert_eq!(via_b, via_p);
        assert_eq!(*via_b, *t.matrix());
    }

    #[test]
    fn rational_matches_blaschke() {
        let zs = [c(0.3), Complex64::new(-0.4, 0.2)];
        let b = BlaschkeProduct::from_complex(&zs).unwrap();
        let phi = RationalFunction::from_blaschke(&b);
        let t = Operator::new(CMat::from_fn(4, 4, |i, j| Complex64::new(0.1 * ((i + 2 * j) % 3) as f64, 0.05 * i as f64))).unwrap();
        let a = blaschke_of_operator(&b, &t).unwrap();
        let r = rational_of_operator(&phi, &t).unwrap();
        assert!(linalg::max_abs_diff(&a, &r) < 1e-12);
    }

    #[test]
    fn rejects_spectrum_on_circle() {
        let b = BlaschkeProduct::from_complex(&[c(0.5)]).unwrap();
        assert!(matches!(
            blaschke_of_operator(&b, &Operator::identity(2)),
            Err(OplabError::Spectral(_))
        ));
    }

    proptest! {
        #[test]
        fn diagonal_matches_scalar_and_order_is_immaterial(
            zeros in proptest::collection::vec((0.0f64..0.9, 0.0f64..std::f64::consts::TAU), 1..6),
            diag in proptest::collection::vec((0.0f64..0.9, 0.0f64..std::f64::consts::TAU), 1..6),
        ) {
            let zs: Vec<DiskPoint> = zeros.iter().map(|&(r, a)| DiskPoint::new(Complex64::from_polar(r, a)).unwrap()).collect();
            let b = BlaschkeProduct::allowing_repeats(zs).unwrap();
            let d: Vec<Complex64> = diag.iter().map(|&(r, a)| Complex64::from_polar(r, a)).collect();
            let t = Operator::diagonal(&d);
            let out = blaschke_of_operator(&b, &t).unwrap();
            for (i, &x) in d.iter().enumerate() {
                prop_assert!((out[(i, i)] - b.eval(x).unwrap()).norm() < 1e-10);
            }
            let dense = Operator::new(CMat::from_fn(d.len(), d.len(), |i, j| {
                if i <= j { d[i] * 0.5 + Complex64::new(0.1 * (j - i) as f64, 0.0) } else { ZERO }
            })).unwrap();
            let f = blaschke_of_operator(&b, &dense).unwrap();
            let r = blaschke_of_operator_reversed(&b, &dense).unwrap();
            prop_assert!(linalg::spectral_norm(&(f.matrix() - r.matrix())) < 1e-9);
        }
    }
}
