//! Similarity to a contraction from the Stein equation `P − T*PT = I`.

use serde::Serialize;

use super::SimilarityWitness;
use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat};
use crate::operator::Operator;

pub const STEIN_REL_TOL: f64 = 1e-12;
/// Doubling steps before giving up; each step doubles the number of
/// summed Neumann terms.
pub const MAX_DOUBLINGS: usize = 64;
pub const KRONECKER_MAX_DIM: usize = 64;
pub const RADIUS_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SteinMethod {
    Doubling,
    Kronecker,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinWitness {
    #[serde(flatten)]
    pub witness: SimilarityWitness,
    /// Smallest eigenvalue of `P − T*PT − I`, relative to `‖P‖`.
    pub stein_margin: f64,
    pub method: SteinMethod,
    pub steps: usize,
}

/// `P = Σ_k (T*)^k T^k` by Smith doubling: `P ← P + A*PA`, `A ← A²`.
/// Falls back to the Kronecker linear system at small dimension.
pub fn solve_stein(t: &CMat) -> Result<(CMat, SteinMethod, usize)> {
    let n = t.nrows();
    let mut p = linalg::identity(n);
    let mut a = t.clone();
    for step in 1..=MAX_DOUBLINGS {
        let inc = a.adjoint() * &p * &a;
        let inc_norm = linalg::spectral_norm(&inc);
        p += &inc;
        if !linalg::is_finite(&p) {
            break;
        }
        if inc_norm <= STEIN_REL_TOL * linalg::spectral_norm(&p) {
            return Ok((linalg::hermitian_part(&p), SteinMethod::Doubling, step));
        }
        a = &a * &a;
    }
    if n <= KRONECKER_MAX_DIM {
        // vec(T*PT) = (Tᵀ ⊗ T*) vec(P) in column-major order
        let k = linalg::kron(&t.transpose(), &t.adjoint());
        let sys = linalg::identity(n * n) - k;
        let rhs = CMat::from_column_slice(n * n, 1, linalg::identity(n).as_slice());
        let v = linalg::solve(&sys, &rhs)?;
        let p = CMat::from_column_slice(n, n, v.as_slice());
        return Ok((linalg::hermitian_part(&p), SteinMethod::Kronecker, 0));
    }
    Err(OplabError::NoConvergence(format!(
        "Stein series did not converge after {MAX_DOUBLINGS} doublings"
    )))
}

/// `X = P^{1/2}` with `P − T*PT = I`, so that `‖XTX⁻¹‖ < 1`.
pub fn lyapunov_similarity(t: &Operator) -> Result<SteinWitness> {
    let rho = t.spectral_radius();
    if !(rho < 1.0 - RADIUS_MARGIN) {
        return Err(OplabError::NoConvergence(format!(
            "spectral radius {rho:.12} is not below 1; no Stein solution"
        )));
    }
    let (p, method, steps) = solve_stein(t.matrix())?;
    let (vals, _) = linalg::hermitian_eigen(&p);
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    if !(lo > 0.0) {
        return Err(OplabError::NoConvergence(format!("Stein solution is not positive definite (λ_min = {lo:.3e})")));
    }
    let x = linalg::hermitian_sqrt(&p, -1e-12)?;
    let mut witness = SimilarityWitness::new(x, t.matrix())?;
    witness.cond = (hi / lo).sqrt();
    let defect = &p - t.adjoint() * &p * t.matrix() - linalg::identity(t.dim());
    let stein_margin = linalg::min_hermitian_eigenvalue(&defect) / hi;
    Ok(SteinWitness { witness, stein_margin, method, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use num_complex::Complex64;

    #[test]
    fn nilpotent_closed_form() {
        let t = Operator::new(CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])).unwrap();
        let w = lyapunov_similarity(&t).unwrap();
        let x = &w.witness.x;
        assert!((x[(0, 0)] - c(1.0)).norm() < 1e-14);
        assert!((x[(1, 1)] - c(2f64.sqrt())).norm() < 1e-14);
        assert!((w.witness.conjugated_norm - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((w.witness.cond - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn diagonal_is_left_alone() {
        let d = [c(0.3), Complex64::new(0.0, -0.8), c(-0.5)];
        let w = lyapunov_similarity(&Operator::diagonal(&d)).unwrap();
        assert!((w.witness.conjugated_norm - 0.8).abs() < 1e-12);
        let conj = w.witness.conjugate(&linalg::diag(&d));
        assert!(linalg::max_abs_diff(&conj, &linalg::diag(&d)) < 1e-12);
    }

    #[test]
    fn scaled_unitary_has_unit_condition() {
        // rotation by 0.7 rad, scaled
        let (cs, sn) = (0.7f64.cos(), 0.7f64.sin());
        let u = CMat::from_row_slice(2, 2, &[c(cs), c(-sn), c(sn), c(cs)]) * c(0.9);
        let w = lyapunov_similarity(&Operator::new(u).unwrap()).unwrap();
        assert!((w.witness.cond - 1.0).abs() < 1e-8);
    }

    #[test]
    fn kronecker_agrees_with_doubling() {
        let t = CMat::from_row_slice(3, 3, &[c(0.5), c(2.0), c(0.1), c(0.0), c(-0.4), c(1.0), c(0.0), c(0.0), c(0.2)]);
        let (p, method, _) = solve_stein(&t).unwrap();
        assert_eq!(method, SteinMethod::Doubling);
        let k = linalg::kron(&t.transpose(), &t.adjoint());
        let v = linalg::solve(&(linalg::identity(9) - k), &CMat::from_column_slice(9, 1, linalg::identity(3).as_slice())).unwrap();
        let pk = CMat::from_column_slice(3, 3, v.as_slice());
        assert!(linalg::max_abs_diff(&p, &pk) < 1e-10 * linalg::spectral_norm(&p));
    }

    #[test]
    fn rejects_unit_spectral_radius() {
        let t = Operator::diagonal(&[c(1.0)]);
        assert!(matches!(lyapunov_similarity(&t), Err(OplabError::NoConvergence(_))));
    }
}
