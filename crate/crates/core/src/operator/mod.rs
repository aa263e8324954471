//! Dense finite-dimensional operator algebra.

pub mod blocks;
pub mod bounds;
pub mod calculus;
pub mod dilation;
pub mod io;

use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat};

pub use blocks::{assemble_blocks, permute_r0, BlockOperator};
pub use bounds::{
    poly_bound_lower, poly_bound_lower_with, power_bound, tadmor_ritt, tadmor_ritt_default, PolyBound, PowerBound,
    TadmorRitt, BoundReport,
};
pub use calculus::{blaschke_of_operator, poly_of_operator, rational_of_operator};
pub use dilation::{schaffer_dilation_trunc, Dilation};

/// Square dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(CMat);

impl Operator {
    pub fn new(entries: CMat) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(OplabError::Dimension(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if !linalg::is_finite(&entries) {
            return Err(OplabError::Invariant("operator has non-finite entries".into()));
        }
        Ok(Operator(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Operator(CMat::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Operator(linalg::identity(n))
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        Operator(linalg::diag(values))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.0)
    }

    pub fn spectral_radius(&self) -> f64 {
        linalg::spectral_radius(&self.0)
    }
}

impl Deref for Operator {
    type Target = CMat;

    fn deref(&self) -> &CMat {
        &self.0
    }
}

impl TryFrom<CMat> for Operator {
    type Error = OplabError;

    fn try_from(m: CMat) -> Result<Self> {
        Operator::new(m)
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::serde_ext::matrix::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = crate::serde_ext::matrix::deserialize(d)?;
        Operator::new(m).map_err(serde::de::Error::custom)
    }
}
