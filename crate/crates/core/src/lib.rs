//! Numerical laboratory for similarity and functional calculus of operators
//! built from Blaschke products, interpolating sequences and dilations.

// `!(x < y)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod operator;
pub mod interpolation;
pub mod lemerdy;
pub mod linalg;
pub mod scalar_fn;
pub mod serde_ext;
pub mod similarity;
pub mod theorem_lab;

pub use error::{OplabError, Result};
