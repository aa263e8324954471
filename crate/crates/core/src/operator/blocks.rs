//! Block operators and the coordinate permutation of the 3×3 form.

use serde::Serialize;

use super::Operator;
use crate::error::{OplabError, Result};
use crate::linalg::{CMat, ZERO};

/// Grid of conforming blocks. `zero[i][j]` declares a block to be exactly
/// zero; construction fails if a declared-zero block has a nonzero entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockOperator {
    pub row_dims: Vec<usize>,
    pub col_dims: Vec<usize>,
    #[serde(skip)]
    pub blocks: Vec<Vec<CMat>>,
    pub zero: Vec<Vec<bool>>,
}

impl BlockOperator {
    pub fn new(blocks: Vec<Vec<CMat>>, zero: Vec<Vec<bool>>) -> Result<Self> {
        let rows = blocks.len();
        if rows == 0 {
            return Err(OplabError::Dimension("empty block grid".into()));
        }
        let cols = blocks[0].len();
        if blocks.iter().any(|r| r.len() != cols) || zero.len() != rows || zero.iter().any(|r| r.len() != cols) {
            return Err(OplabError::Dimension("ragged block grid or zero mask".into()));
        }
        let row_dims: Vec<usize> = blocks.iter().map(|r| r[0].nrows()).collect();
        let col_dims: Vec<usize> = blocks[0].iter().map(|b| b.ncols()).collect();
        for (i, row) in blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                if b.nrows() != row_dims[i] || b.ncols() != col_dims[j] {
                    return Err(OplabError::Dimension(format!(
                        "block ({i},{j}) is {}x{}, expected {}x{}",
                        b.nrows(),
                        b.ncols(),
                        row_dims[i],
                        col_dims[j]
                    )));
                }
                if zero[i][j] && b.iter().any(|z| *z != ZERO) {
                    return Err(OplabError::Invariant(format!("declared zero block ({i},{j}) is nonzero")));
                }
            }
        }
        Ok(BlockOperator { row_dims, col_dims, blocks, zero })
    }

    /// Mask derived from the blocks themselves (exactly-zero blocks).
    pub fn from_blocks(blocks: Vec<Vec<CMat>>) -> Result<Self> {
        let zero = blocks
            .iter()
            .map(|r| r.iter().map(|b| b.iter().all(|z| *z == ZERO)).collect())
            .collect();
        Self::new(blocks, zero)
    }

    pub fn block(&self, i: usize, j: usize) -> &CMat {
        &self.blocks[i][j]
    }

    fn offsets(dims: &[usize]) -> Vec<usize> {
        let mut out = vec![0];
        for d in dims {
            out.push(out.last().unwrap() + d);
        }
        out
    }

    /// Dense matrix of the whole grid.
    pub fn to_matrix(&self) -> CMat {
        let ro = Self::offsets(&self.row_dims);
        let co = Self::offsets(&self.col_dims);
        let mut m = CMat::zeros(ro[ro.len() - 1], co[co.len() - 1]);
        for (i, row) in self.blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                m.view_mut((ro[i], co[j]), (b.nrows(), b.ncols())).copy_from(b);
            }
        }
        m
    }

    /// Splits a dense matrix along the given row and column partitions.
    pub fn split(m: &CMat, row_dims: &[usize], col_dims: &[usize]) -> Result<Self> {
        if row_dims.iter().sum::<usize>() != m.nrows() || col_dims.iter().sum::<usize>() != m.ncols() {
            return Err(OplabError::Dimension("partition does not match matrix size".into()));
        }
        let ro = Self::offsets(row_dims);
        let co = Self::offsets(col_dims);
        let blocks = (0..row_dims.len())
            .map(|i| {
                (0..col_dims.len())
                    .map(|j| m.view((ro[i], co[j]), (row_dims[i], col_dims[j])).into_owned())
                    .collect()
            })
            .collect();
        Self::from_blocks(blocks)
    }
}

/// Flattens a square block grid to an operator.
pub fn assemble_blocks(spec: &BlockOperator) -> Result<Operator> {
    Operator::new(spec.to_matrix())
}

/// Builds `R₀ = [[T₀, 0, A], [0, V₁, K], [0, 0, T₁]]` on `H₀ ⊕ K₁ ⊕ H₁`.
pub fn r0_blocks(t0: &CMat, v1: &CMat, t1: &CMat, a: &CMat, k: &CMat) -> Result<BlockOperator> {
    let (h0, k1, h1) = (t0.nrows(), v1.nrows(), t1.nrows());
    BlockOperator::new(
        vec![
            vec![t0.clone(), CMat::zeros(h0, k1), a.clone()],
            vec![CMat::zeros(k1, h0), v1.clone(), k.clone()],
            vec![CMat::zeros(h1, h0), CMat::zeros(h1, k1), t1.clone()],
        ],
        vec![vec![false, true, false], vec![true, false, false], vec![true, true, false]],
    )
}

/// Reorders `H₀ ⊕ K₁ ⊕ H₁` as `K₁ ⊕ (H₀ ⊕ H₁)` and certifies the resulting
/// form `[[V₁, *], [0, R]]`: the lower-left block must be exactly zero.
pub fn permute_r0(r0: &BlockOperator) -> Result<BlockOperator> {
    if r0.row_dims.len() != 3 || r0.col_dims != r0.row_dims {
        return Err(OplabError::Dimension("permute_r0 expects a square 3x3 block grid".into()));
    }
    let order = [1usize, 0, 2];
    let b = |i: usize, j: usize| r0.blocks[order[i]][order[j]].clone();
    let hstack = |l: CMat, r: CMat| -> CMat {
        let mut m = CMat::zeros(l.nrows(), l.ncols() + r.ncols());
        m.view_mut((0, 0), (l.nrows(), l.ncols())).copy_from(&l);
        m.view_mut((0, l.ncols()), (r.nrows(), r.ncols())).copy_from(&r);
        m
    };
    let vstack = |t: CMat, u: CMat| -> CMat {
        let mut m = CMat::zeros(t.nrows() + u.nrows(), t.ncols());
        m.view_mut((0, 0), (t.nrows(), t.ncols())).copy_from(&t);
        m.view_mut((t.nrows(), 0), (u.nrows(), u.ncols())).copy_from(&u);
        m
    };
    let top_left = b(0, 0);
    let top_right = hstack(b(0, 1), b(0, 2));
    let bottom_left = vstack(b(1, 0), b(2, 0));
    let bottom_right = vstack(hstack(b(1, 1), b(1, 2)), hstack(b(2, 1), b(2, 2)));
    if bottom_left.iter().any(|z| *z != ZERO) {
        return Err(OplabError::Invariant(
            "K₁ is not invariant: permuted lower-left block is nonzero".into(),
        ));
    }
    BlockOperator::new(
        vec![vec![top_left, top_right], vec![bottom_left, bottom_right]],
        vec![vec![false, false], vec![true, false]],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, c};
    use num_complex::Complex64;

    fn m(r: usize, k: usize, seed: usize) -> CMat {
        CMat::from_fn(r, k, |i, j| Complex64::new(((i * 31 + j * 17 + seed * 7) % 11) as f64 / 11.0 - 0.5, ((i + seed) % 3) as f64 * 0.1))
    }

    #[test]
    fn zero_blocks_assemble_to_zero() {
        let b = BlockOperator::from_blocks(vec![
            vec![CMat::zeros(2, 2), CMat::zeros(2, 1)],
            vec![CMat::zeros(1, 2), CMat::zeros(1, 1)],
        ])
        .unwrap();
        assert!(b.zero.iter().flatten().all(|&z| z));
        assert_eq!(assemble_blocks(&b).unwrap().norm(), 0.0);
    }

    #[test]
    fn declared_zero_must_be_zero() {
        let bad = BlockOperator::new(vec![vec![linalg::identity(1)]], vec![vec![true]]);
        assert!(bad.is_err());
        let ragged = BlockOperator::from_blocks(vec![vec![CMat::zeros(2, 2), CMat::zeros(1, 1)]]);
        assert!(ragged.is_err());
    }

    #[test]
    fn uncoupled_r0_permutes_to_direct_sum() {
        let (t0, v1, t1) = (m(2, 2, 1), m(3, 3, 2), m(2, 2, 3));
        let r0 = r0_blocks(&t0, &v1, &t1, &CMat::zeros(2, 2), &CMat::zeros(3, 2)).unwrap();
        let p = permute_r0(&r0).unwrap();
        assert_eq!(p.block(0, 0), &v1);
        assert!(p.block(0, 1).iter().all(|z| *z == c(0.0)));
        let r = p.block(1, 1);
        assert_eq!(r.view((0, 0), (2, 2)).into_owned(), t0);
        assert_eq!(r.view((2, 2), (2, 2)).into_owned(), t1);
    }

    #[test]
    fn random_r0_has_exact_zero_pattern_after_permutation() {
        let (t0, v1, t1, a, k) = (m(3, 3, 4), m(4, 4, 5), m(2, 2, 6), m(3, 2, 7), m(4, 2, 8));
        let r0 = r0_blocks(&t0, &v1, &t1, &a, &k).unwrap();
        let p = permute_r0(&r0).unwrap();
        assert!(p.zero[1][0]);
        // dense form equals the original with indices reordered K₁, H₀, H₁
        let dense = assemble_blocks(&p).unwrap();
        let orig = assemble_blocks(&r0).unwrap();
        let perm: Vec<usize> = (3..7).chain(0..3).chain(7..9).collect();
        let pm = CMat::from_fn(9, 9, |i, j| orig[(perm[i], perm[j])]);
        assert_eq!(*dense, pm);
    }

    #[test]
    fn split_round_trip() {
        let x = m(5, 5, 9);
        let b = BlockOperator::split(&x, &[2, 3], &[4, 1]).unwrap();
        assert_eq!(b.to_matrix(), x);
    }
}
