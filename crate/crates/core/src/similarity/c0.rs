//! Splitting along `H₀ = ker θ₀(T)` and its orthogonal complement.

use serde::Serialize;

use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat};
use crate::operator::{blaschke_of_operator, Operator};
use crate::scalar_fn::BlaschkeProduct;

pub const KERNEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C0Split {
    #[serde(with = "crate::serde_ext::matrix")]
    pub t0: CMat,
    #[serde(with = "crate::serde_ext::matrix")]
    pub a: CMat,
    #[serde(with = "crate::serde_ext::matrix")]
    pub t1: CMat,
    /// Unitary `[W₀ W₁]` with `W₀` spanning `H₀`.
    #[serde(skip)]
    pub basis: CMat,
    pub kernel_dim: usize,
    /// `‖θ₀(T₀)‖`.
    pub annihilation_residual: f64,
    /// `‖W₁*TW₀‖` before it is discarded.
    pub invariance_residual: f64,
    /// `max |W [[T₀, A], [0, T₁]] W* − T|`.
    pub reconstruction_residual: f64,
}

pub fn c0_split(t: &Operator, theta0: &BlaschkeProduct) -> Result<C0Split> {
    let n = t.dim();
    let th = blaschke_of_operator(theta0, t)?;
    let (_, sigma, v) = linalg::svd_full(th.matrix());
    let k = sigma.iter().filter(|&&s| s < KERNEL_TOL).count();
    if k == 0 {
        return Err(OplabError::EmptyKernel(format!(
            "θ₀(T) has smallest singular value {:.3e}",
            sigma.last().copied().unwrap_or(f64::NAN)
        )));
    }
    // kernel vectors are the trailing right singular vectors
    let mut w = CMat::zeros(n, n);
    w.view_mut((0, 0), (n, k)).copy_from(&v.columns(n - k, k));
    w.view_mut((0, k), (n, n - k)).copy_from(&v.columns(0, n - k));
    let b = w.adjoint() * t.matrix() * &w;
    let t0 = b.view((0, 0), (k, k)).into_owned();
    let a = b.view((0, k), (k, n - k)).into_owned();
    let t1 = b.view((k, k), (n - k, n - k)).into_owned();
    let invariance_residual = linalg::spectral_norm(&b.view((k, 0), (n - k, k)).into_owned());
    let scale = t.norm().max(1.0);
    if invariance_residual > KERNEL_TOL * scale {
        return Err(OplabError::Invariant(format!(
            "ker θ₀(T) is not invariant (residual {invariance_residual:.3e})"
        )));
    }
    let annihilation_residual = blaschke_of_operator(theta0, &Operator::new(t0.clone())?)?.norm();
    let mut upper = b.clone();
    upper.view_mut((k, 0), (n - k, k)).fill(linalg::ZERO);
    let reconstruction_residual = linalg::max_abs_diff(&(&w * upper * w.adjoint()), t.matrix());
    Ok(C0Split { t0, a, t1, basis: w, kernel_dim: k, annihilation_residual, invariance_residual, reconstruction_residual })
}
