//! Truncated Schäffer isometric dilation of a contraction.

use super::blocks::BlockOperator;
use super::Operator;
use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat};

const CONTRACTION_TOL: f64 = 1e-10;
const SQRT_CLAMP: f64 = -1e-12;

/// `V` on `H ⊕ D^m`: `(x, d₁, …, d_m) ↦ (T₁x, D x, d₁, …, d_{m−1})` with
/// `D = (I − T₁*T₁)^{1/2}`. Isometric except on the last defect copy.
#[derive(Debug, Clone)]
pub struct Dilation {
    pub v: BlockOperator,
    pub defect: CMat,
    pub copies: usize,
}

impl Dilation {
    pub fn operator(&self) -> Result<Operator> {
        Operator::new(self.v.to_matrix())
    }

    /// The same dilation split as `[[V₁, K], [0, T₁]]` on `K₁ ⊕ H`, with
    /// `K₁` the defect copies (invariant) and `H` coinvariant.
    pub fn coinvariant_form(&self) -> (CMat, CMat) {
        let n = self.defect.nrows();
        let m = self.copies;
        let mut v1 = CMat::zeros(n * m, n * m);
        for k in 1..m {
            v1.view_mut((k * n, (k - 1) * n), (n, n)).copy_from(&linalg::identity(n));
        }
        let mut k = CMat::zeros(n * m, n);
        if m > 0 {
            k.view_mut((0, 0), (n, n)).copy_from(&self.defect);
        }
        (v1, k)
    }
}

pub fn schaffer_dilation_trunc(t1: &Operator, copies: usize) -> Result<Dilation> {
    let norm = t1.norm();
    if norm > 1.0 + CONTRACTION_TOL {
        return Err(OplabError::NotContraction { norm });
    }
    let n = t1.dim();
    let gram = linalg::identity(n) - t1.adjoint() * t1.matrix();
    let defect = linalg::hermitian_sqrt(&gram, SQRT_CLAMP)?;
    let size = copies + 1;
    let mut blocks = vec![vec![CMat::zeros(n, n); size]; size];
    let mut zero = vec![vec![true; size]; size];
    blocks[0][0] = t1.matrix().clone();
    zero[0][0] = false;
    if copies > 0 {
        blocks[1][0] = defect.clone();
        zero[1][0] = defect.iter().all(|z| *z == linalg::ZERO);
        for k in 1..copies {
            blocks[k + 1][k] = linalg::identity(n);
            zero[k + 1][k] = false;
        }
    }
    zero[0][0] = blocks[0][0].iter().all(|z| *z == linalg::ZERO);
    let v = BlockOperator::new(blocks, zero)?;
    Ok(Dilation { v, defect, copies })
}
