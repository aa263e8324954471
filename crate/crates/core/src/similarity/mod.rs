//! Similarity witnesses: Stein-equation similarity to a contraction,
//! eigenbasis diagonalisation, Sylvester intertwiners, the direct-sum map
//! for an isometric plus a stable part, and the C₀ splitting.

pub mod c0;
pub mod direct_sum;
pub mod eigenbasis;
pub mod stein;
pub mod sylvester;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat};

pub use c0::{c0_split, C0Split};
pub use direct_sum::{direct_sum_similarity, lemma_bound, DirectSumWitness};
pub use eigenbasis::{eigenbasis_similarity, EigenbasisWitness};
pub use stein::{lyapunov_similarity, solve_stein, SteinWitness};
pub use sylvester::{block_conjugation_offdiag, sylvester_intertwiner, SylvesterSolution};

/// `S U S⁻¹` with `U` upper triangular, eigenvalues of modulus at most
/// `radius`, a Gaussian strict upper part, and `S = I + 0.3G`. Such a matrix
/// is similar to a strict contraction but usually not one itself.
pub fn random_similar_to_contraction(dim: usize, radius: f64, seed: u64) -> Result<CMat> {
    if !(0.0..1.0).contains(&radius) {
        return Err(OplabError::Precondition(format!("radius {radius} must lie in [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng| -> Complex64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    };
    let mut u = CMat::zeros(dim, dim);
    for i in 0..dim {
        let r = radius * rng.random::<f64>().sqrt();
        let t = std::f64::consts::TAU * rng.random::<f64>();
        u[(i, i)] = Complex64::from_polar(r, t);
        for j in i + 1..dim {
            u[(i, j)] = gauss(&mut rng) / (dim as f64).sqrt();
        }
    }
    let s = linalg::identity(dim) + CMat::from_fn(dim, dim, |_, _| gauss(&mut rng) * (0.3 / (dim as f64).sqrt()));
    Ok(&s * u * linalg::inverse(&s)?)
}

/// Condition numbers above this are flagged in reports.
pub const COND_FLAG: f64 = 1e3;

/// Invertible `X` with `cond = ‖X‖‖X⁻¹‖` and `conjugated_norm = ‖XTX⁻¹‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityWitness {
    #[serde(skip)]
    pub x: CMat,
    #[serde(skip)]
    pub x_inv: CMat,
    pub cond: f64,
    pub conjugated_norm: f64,
}

impl SimilarityWitness {
    /// Builds the witness, rejecting numerically singular `X`.
    pub fn new(x: CMat, t: &CMat) -> Result<Self> {
        let s = linalg::singular_values(&x);
        let (hi, lo) = (s[0], s[s.len() - 1]);
        if !(lo > 1e-12 * hi) {
            return Err(OplabError::NotABasis(format!(
                "witness is numerically singular (σ_min/σ_max = {:.3e})",
                lo / hi
            )));
        }
        let x_inv = linalg::inverse(&x)?;
        let conjugated_norm = linalg::spectral_norm(&(&x * t * &x_inv));
        Ok(SimilarityWitness { x, x_inv, cond: hi / lo, conjugated_norm })
    }

    pub fn conjugate(&self, t: &CMat) -> CMat {
        &self.x * t * &self.x_inv
    }

    pub fn flagged(&self) -> bool {
        self.cond > COND_FLAG
    }
}
