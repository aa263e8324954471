use num_complex::Complex64;
use serde::Serialize;

use super::SimilarityWitness;
use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat};
use crate::operator::Operator;

pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenbasisWitness {
    #[serde(flatten)]
    pub witness: SimilarityWitness,
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub eigenvalues: Vec<Complex64>,
    /// `sqrt(cond(G))` for the Gram matrix of the normalised eigenvectors.
    pub cond_from_gram: f64,
    /// `max |XTX⁻¹ − diag(λ)|`.
    pub diagonal_residual: f64,
    pub eigen_residual: f64,
    pub flagged: bool,
}

/// `X` sending the normalised eigenvector `x_n/‖x_n‖` to `e_n`.
pub fn eigenbasis_similarity(t: &Operator, eigvecs: &CMat) -> Result<EigenbasisWitness> {
    let n = t.dim();
    if eigvecs.nrows() != n || eigvecs.ncols() != n {
        return Err(OplabError::Dimension(format!(
            "need {n} eigenvectors of length {n}, got {}x{}",
            eigvecs.nrows(),
            eigvecs.ncols()
        )));
    }
    let mut v = eigvecs.clone();
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(OplabError::NotABasis("zero eigenvector".into()));
        }
        col /= Complex64::new(norm, 0.0);
    }
    let tv = t.matrix() * &v;
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigen_residual: f64 = 0.0;
    for j in 0..n {
        let lam = v.column(j).dotc(&tv.column(j));
        let r = (tv.column(j) - v.column(j) * lam).norm();
        eigen_residual = eigen_residual.max(r);
        eigenvalues.push(lam);
    }
    let scale = t.norm().max(1.0);
    if eigen_residual > EIGEN_RESIDUAL_TOL * scale {
        return Err(OplabError::Precondition(format!(
            "columns are not eigenvectors (residual {eigen_residual:.3e})"
        )));
    }
    let s = linalg::singular_values(&v);
    if !(s[n - 1] > 1e-12 * s[0]) {
        return Err(OplabError::NotABasis(format!(
            "eigenvector matrix is rank deficient (σ_min = {:.3e})",
            s[n - 1]
        )));
    }
    let x = linalg::inverse(&v)?;
    let witness = SimilarityWitness::new(x, t.matrix())?;
    let gram = v.adjoint() * &v;
    let (gv, _) = linalg::hermitian_eigen(&gram);
    let cond_from_gram = (gv[n - 1] / gv[0]).sqrt();
    let conj = witness.conjugate(t.matrix());
    let diagonal_residual = linalg::max_abs_diff(&conj, &linalg::diag(&eigenvalues));
    let flagged = witness.flagged();
    Ok(EigenbasisWitness { witness, eigenvalues, cond_from_gram, diagonal_residual, eigen_residual, flagged })
}
