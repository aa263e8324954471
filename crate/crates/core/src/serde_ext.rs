//! Serde helpers for complex scalars and dense complex matrices.
//!
//! A complex number is written as `[re, im]`; plain JSON numbers are
//! accepted on input as real values. Matrices are row-major nested arrays
//! of such entries.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexRepr> for Complex64 {
    fn from(c: ComplexRepr) -> Self {
        match c {
            ComplexRepr::Real(x) => Complex64::new(x, 0.0),
            ComplexRepr::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

pub fn complex_to_pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        complex_to_pair(z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Ok(ComplexRepr::deserialize(d)?.into())
    }
}

pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(complex_to_pair).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<ComplexRepr>::deserialize(d)?
            .into_iter()
            .map(Complex64::from)
            .collect())
    }
}

pub fn matrix_to_rows(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex_to_pair(&m[(i, j)])).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<ComplexRepr>]) -> Result<DMatrix<Complex64>, String> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err("ragged matrix rows".into());
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j].into()))
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let rows = Vec::<Vec<ComplexRepr>>::deserialize(d)?;
        rows_to_matrix(&rows).map_err(serde::de::Error::custom)
    }
}
