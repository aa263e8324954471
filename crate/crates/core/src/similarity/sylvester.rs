//! Bartels–Stewart solution of `A = TY − YV`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat, CVec};
use crate::operator::bounds::upper_solve_shifted;

pub const MIN_SPECTRAL_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SylvesterSolution {
    #[serde(with = "crate::serde_ext::matrix")]
    pub y: CMat,
    /// `‖TY − YV − A‖`.
    pub residual: f64,
    /// `residual / ((‖T‖ + ‖V‖) ‖Y‖)`.
    pub relative_residual: f64,
    pub gap: f64,
}

pub fn spectral_gap(t: &CMat, v: &CMat) -> f64 {
    let et = linalg::eigenvalues(t);
    let ev = linalg::eigenvalues(v);
    et.iter()
        .flat_map(|a| ev.iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min)
}

pub fn sylvester_intertwiner(t: &CMat, v: &CMat, a: &CMat) -> Result<SylvesterSolution> {
    let (m, n) = (t.nrows(), v.nrows());
    if t.ncols() != m || v.ncols() != n || a.nrows() != m || a.ncols() != n {
        return Err(OplabError::Dimension(format!(
            "T is {}x{}, V is {}x{}, A is {}x{}",
            t.nrows(),
            t.ncols(),
            v.nrows(),
            v.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let (q1, s1) = linalg::schur(t)?;
    let (q2, s2) = linalg::schur(v)?;
    let gap = s1
        .diagonal()
        .iter()
        .flat_map(|x| s2.diagonal().iter().map(move |y| (x - y).norm()).collect::<Vec<_>>())
        .fold(f64::INFINITY, f64::min);
    if gap <= MIN_SPECTRAL_GAP {
        return Err(OplabError::SpectraOverlap { gap });
    }
    // S₁Y' − Y'S₂ = Q₁*AQ₂, column by column
    let rhs = q1.adjoint() * a * &q2;
    let mut yp = CMat::zeros(m, n);
    for j in 0..n {
        let mut b: CVec = rhs.column(j).into_owned();
        for k in 0..j {
            b += yp.column(k) * s2[(k, j)];
        }
        let pivots: Vec<Complex64> = s1.diagonal().iter().map(|d| d - s2[(j, j)]).collect();
        let col = upper_solve_shifted(&s1, &pivots, &b);
        yp.set_column(j, &col);
    }
    let y = &q1 * yp * q2.adjoint();
    let residual = linalg::spectral_norm(&(t * &y - &y * v - a));
    let scale = (linalg::spectral_norm(t) + linalg::spectral_norm(v)) * linalg::spectral_norm(&y);
    let relative_residual = if scale > 0.0 { residual / scale } else { residual };
    Ok(SylvesterSolution { y, residual, relative_residual, gap })
}

/// Top-right block of `[[I, Y], [0, I]] [[T, A], [0, V]] [[I, −Y], [0, I]]`,
/// formed from the dense block matrices.
pub fn block_conjugation_offdiag(t: &CMat, v: &CMat, a: &CMat, y: &CMat) -> CMat {
    let (m, n) = (t.nrows(), v.nrows());
    let mut r = CMat::zeros(m + n, m + n);
    r.view_mut((0, 0), (m, m)).copy_from(t);
    r.view_mut((0, m), (m, n)).copy_from(a);
    r.view_mut((m, m), (n, n)).copy_from(v);
    let mut left = linalg::identity(m + n);
    left.view_mut((0, m), (m, n)).copy_from(y);
    let mut right = linalg::identity(m + n);
    right.view_mut((0, m), (m, n)).copy_from(&(-y));
    let conj = left * r * right;
    conj.view((0, m), (m, n)).into_owned()
}
