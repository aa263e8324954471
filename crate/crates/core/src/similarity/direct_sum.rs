//! Similarity of `T` to `T|_M ⊕ T|_N` for an invariant splitting into a
//! part similar to an isometry and a stable part.

use serde::Serialize;

use super::SimilarityWitness;
use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat};
use crate::operator::{power_bound, Operator};

pub const DEFAULT_HORIZON: usize = 200;
pub const STABILITY_THRESHOLD: f64 = 0.1;
pub const INVARIANCE_TOL: f64 = 1e-8;
const UNIMODULAR_TOL: f64 = 1e-8;
const EIGENBASIS_MAX_COND: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectSumWitness {
    /// `x` is the inverse of `[U_M U_N]`, so `xTx⁻¹ = T|_M ⊕ T|_N`.
    #[serde(flatten)]
    pub witness: SimilarityWitness,
    pub dim_m: usize,
    pub dim_n: usize,
    /// `C = max_{n ≤ horizon} ‖Tⁿ‖`.
    pub power_bound: f64,
    /// `c = min_{n ≤ horizon} σ_min(Tⁿ|_M)`.
    pub lower_bound: f64,
    /// `(1 + 2C/c + 2(C/c)²)^{1/2}`.
    pub certificate: f64,
    /// Measured `‖X⁻¹‖` for `X(x ⊕ y) = x + y`.
    pub inverse_norm: f64,
    pub certified: bool,
    pub invariance_residual: f64,
    /// `‖Tⁿ|_N‖` at the horizon.
    pub stable_tail: f64,
    /// Norm of the off-diagonal blocks of `X⁻¹TX`.
    pub coupling_residual: f64,
}

pub fn lemma_bound(c_upper: f64, c_lower: f64) -> f64 {
    let r = c_upper / c_lower;
    (1.0 + 2.0 * r + 2.0 * r * r).sqrt()
}

fn invariance_residual(t: &CMat, u: &CMat) -> f64 {
    let tu = t * u;
    linalg::spectral_norm(&(&tu - u * (u.adjoint() * &tu)))
}

pub fn direct_sum_similarity(t: &Operator, basis_m: &CMat, basis_n: &CMat, horizon: usize) -> Result<DirectSumWitness> {
    let dim = t.dim();
    let (dm, dn) = (basis_m.ncols(), basis_n.ncols());
    if basis_m.nrows() != dim || basis_n.nrows() != dim || dm + dn != dim {
        return Err(OplabError::Dimension(format!(
            "bases with {dm} and {dn} columns do not split dimension {dim}"
        )));
    }
    let um = linalg::orthonormal_columns(basis_m)?;
    let un = linalg::orthonormal_columns(basis_n)?;
    let scale = t.norm().max(1.0);
    let invariance = invariance_residual(t, &um).max(invariance_residual(t, &un));
    if invariance > INVARIANCE_TOL * scale {
        return Err(OplabError::Precondition(format!("subspaces are not invariant (residual {invariance:.3e})")));
    }

    let tm = um.adjoint() * t.matrix() * &um;
    let (spec_m, vecs_m) = linalg::eigenvectors(&tm)?;
    if let Some(bad) = spec_m.iter().find(|l| (l.norm() - 1.0).abs() > UNIMODULAR_TOL) {
        return Err(OplabError::Precondition(format!("T|_M has eigenvalue {bad} off the unit circle")));
    }
    if dm > 0 && linalg::condition_number(&vecs_m) > EIGENBASIS_MAX_COND {
        return Err(OplabError::Precondition("T|_M is not diagonalizable".into()));
    }

    let mut lower = if dm > 0 { 1.0f64 } else { f64::INFINITY };
    let mut wm = um.clone();
    let mut wn = un.clone();
    for _ in 0..horizon {
        wm = t.matrix() * &wm;
        wn = t.matrix() * &wn;
        if dm > 0 {
            lower = lower.min(linalg::min_singular_value(&wm));
        }
    }
    let stable_tail = linalg::spectral_norm(&wn);
    if !(stable_tail < STABILITY_THRESHOLD) {
        return Err(OplabError::Precondition(format!(
            "T|_N is not stable: ‖Tⁿ|_N‖ = {stable_tail:.3e} at n = {horizon}"
        )));
    }
    let c_upper = power_bound(t, horizon.max(1))?;
    if c_upper.diverged_at.is_some() {
        return Err(OplabError::Precondition("T is not power bounded".into()));
    }

    let mut x = CMat::zeros(dim, dim);
    x.view_mut((0, 0), (dim, dm)).copy_from(&um);
    x.view_mut((0, dm), (dim, dn)).copy_from(&un);
    let smin = linalg::min_singular_value(&x);
    if !(smin > 1e-12) {
        return Err(OplabError::NotABasis("M and N do not span the space".into()));
    }
    let inverse_norm = 1.0 / smin;
    let certificate = if dm == 0 { 1.0 } else { lemma_bound(c_upper.value, lower) };
    let witness = SimilarityWitness::new(linalg::inverse(&x)?, t.matrix())?;
    let conj = witness.conjugate(t.matrix());
    let coupling_residual = linalg::spectral_norm(&conj.view((0, dm), (dm, dn)).into_owned())
        .max(linalg::spectral_norm(&conj.view((dm, 0), (dn, dm)).into_owned()));
    Ok(DirectSumWitness {
        witness,
        dim_m: dm,
        dim_n: dn,
        power_bound: c_upper.value,
        lower_bound: lower,
        certificate,
        inverse_norm,
        certified: inverse_norm <= certificate * (1.0 + 1e-12),
        invariance_residual: invariance,
        stable_tail,
        coupling_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use num_complex::Complex64;

    #[test]
    fn orthogonal_sum_is_trivial() {
        let t = Operator::diagonal(&[Complex64::from_polar(1.0, 0.4), c(-1.0), c(0.5)]);
        let id = linalg::identity(3);
        let w = direct_sum_similarity(&t, &id.columns(0, 2).into_owned(), &id.columns(2, 1).into_owned(), DEFAULT_HORIZON).unwrap();
        assert!((w.inverse_norm - 1.0).abs() < 1e-14);
        assert!((w.witness.cond - 1.0).abs() < 1e-14);
        assert!(w.certificate >= 5f64.sqrt() - 1e-12 && w.certified);
        assert!(w.coupling_residual < 1e-15);
    }

    #[test]
    fn coupled_two_by_two() {
        let t = Operator::new(CMat::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(0.5)])).unwrap();
        let m = CMat::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
        let n = CMat::from_column_slice(2, 1, &[c(2.0), c(-1.0)]);
        let w = direct_sum_similarity(&t, &m, &n, DEFAULT_HORIZON).unwrap();
        // X = [[1, 2/√5], [0, −1/√5]]: σ_min² = 1 − 2/√5
        let oracle = 1.0 / (1.0 - 2.0 / 5f64.sqrt()).sqrt();
        assert!((w.inverse_norm - oracle).abs() < 1e-12 * oracle);
        assert!((w.lower_bound - 1.0).abs() < 1e-14);
        assert!(w.certified);
        assert!(w.coupling_residual < 1e-12);
    }

    #[test]
    fn coupling_sweep_stays_certified() {
        let mut last_cond = 0.0;
        for k in 0..=10 {
            let a = k as f64;
            let t = Operator::new(CMat::from_row_slice(2, 2, &[c(1.0), c(a), c(0.0), c(0.5)])).unwrap();
            let m = CMat::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
            let n = CMat::from_column_slice(2, 1, &[c(2.0 * a), c(-1.0)]);
            let w = direct_sum_similarity(&t, &m, &n, DEFAULT_HORIZON).unwrap();
            assert!(w.certified, "a = {a}: {} > {}", w.inverse_norm, w.certificate);
            assert!(w.witness.cond >= last_cond);
            last_cond = w.witness.cond;
        }
    }

    #[test]
    fn preconditions() {
        let t = Operator::new(CMat::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(0.5)])).unwrap();
        let e1 = CMat::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
        let e2 = CMat::from_column_slice(2, 1, &[c(0.0), c(1.0)]);
        assert!(matches!(direct_sum_similarity(&t, &e1, &e2, 200), Err(OplabError::Precondition(_))));
        let slow = Operator::diagonal(&[c(1.0), c(0.999)]);
        assert!(matches!(direct_sum_similarity(&slow, &e1, &e2, 200), Err(OplabError::Precondition(_))));
        let jordan = Operator::new(CMat::from_row_slice(3, 3, &[c(1.0), c(1.0), c(0.0), c(0.0), c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)])).unwrap();
        let id = linalg::identity(3);
        assert!(direct_sum_similarity(&jordan, &id.columns(0, 2).into_owned(), &id.columns(2, 1).into_owned(), 200).is_err());
    }
}
