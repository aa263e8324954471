//! Normalised kernels `k_n = (1−|λ_n|²)^{1/2} B_n / (1 − λ̄_n z)` of the
//! model space of a Blaschke product, in Gram–Cholesky coordinates.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat};
use crate::scalar_fn::blaschke::factor;
use crate::scalar_fn::{h2_gram_sampled, BlaschkeProduct, RationalFunction};

pub const NORM_TOL: f64 = 1e-8;
pub const EIGEN_TOL: f64 = 1e-7;
/// Beyond this the kernel coordinates carry no usable digits.
pub const MAX_GRAM_COND: f64 = 1e12;

#[derive(Debug, Clone, Serialize)]
pub struct ModelBasis {
    pub product: BlaschkeProduct,
    #[serde(skip)]
    pub kernels: Vec<RationalFunction>,
    /// `gram[(i, j)] = ⟨k_j, k_i⟩`.
    #[serde(with = "crate::serde_ext::matrix")]
    pub gram: CMat,
    /// `C = L*` for `gram = LL*`: column `n` holds `k_n` in an orthonormal
    /// basis of the model space.
    #[serde(skip)]
    pub coords: CMat,
    pub quadrature_points: usize,
    /// `max_n |‖k_n‖² − 1|`.
    pub norm_error: f64,
    /// Largest residual of the compressed shift on the kernels.
    pub eigen_residual: f64,
    pub gram_cond: f64,
}

impl ModelBasis {
    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn lambdas(&self) -> Vec<Complex64> {
        self.product.zero_values()
    }

    /// The compressed shift `P_{K_B} S|_{K_B}` in the orthonormal coordinates.
    pub fn compressed_shift(&self) -> Result<CMat> {
        let d = linalg::diag(&self.lambdas());
        Ok(&self.coords * d * linalg::inverse(&self.coords)?)
    }
}

pub fn kernel(b: &BlaschkeProduct, n: usize) -> Result<RationalFunction> {
    let lam = b.zeros()[n];
    let c = (1.0 - lam.modulus().powi(2)).sqrt();
    let k = RationalFunction::cauchy_kernel(lam).mul(&RationalFunction::from_blaschke(&b.without(n)))?;
    Ok(k.scale(Complex64::new(c, 0.0)))
}

/// `(k_1(z), …, k_n(z), z k_1(z), …, z k_n(z))` from prefix and suffix
/// products of the factors.
fn kernel_values(b: &BlaschkeProduct, z: Complex64) -> Vec<Complex64> {
    let lams = b.zero_values();
    let n = lams.len();
    let f: Vec<Complex64> = lams.iter().map(|&l| factor(l, z)).collect();
    let one = Complex64::new(1.0, 0.0);
    let mut suffix = vec![one; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] * f[k];
    }
    let mut out = vec![one; 2 * n];
    let mut prefix = one;
    for k in 0..n {
        let l = lams[k];
        let c = (1.0 - l.norm_sqr()).sqrt();
        out[k] = prefix * suffix[k + 1] * c / (one - l.conj() * z);
        out[n + k] = z * out[k];
        prefix *= f[k];
    }
    out
}

pub fn build_model_basis(b: &BlaschkeProduct, quadrature_points: usize) -> Result<ModelBasis> {
    let n = b.len();
    if n == 0 {
        return Err(OplabError::Precondition("model basis needs at least one zero".into()));
    }
    let kernels = (0..n).map(|i| kernel(b, i)).collect::<Result<Vec<_>>>()?;
    // one quadrature pass for ⟨k_j, k_i⟩ and ⟨z k_j, k_i⟩, sampling the
    // kernels in factored form: expanded coefficients cancel badly near
    // zeros close to the circle
    let q = h2_gram_sampled(2 * n, quadrature_points, |z| kernel_values(b, z))?;
    let gram = CMat::from_fn(n, n, |i, j| q.value[i][j]);
    let gz = CMat::from_fn(n, n, |i, j| q.value[i][n + j]);
    let norm_error = (0..n).map(|i| (gram[(i, i)].re - 1.0).abs()).fold(0.0, f64::max);
    if norm_error > NORM_TOL {
        return Err(OplabError::Invariant(format!("kernels are not unit vectors (error {norm_error:.3e})")));
    }
    let l = linalg::cholesky(&gram).map_err(|_| {
        OplabError::Degenerate("Gram matrix is not positive definite; zeros too close".into())
    })?;
    let gram_cond = linalg::condition_number(&gram);
    if !(gram_cond <= MAX_GRAM_COND) {
        return Err(OplabError::Degenerate(format!("Gram condition number {gram_cond:.3e}; zeros too close")));
    }
    let coords = l.adjoint();
    // compression of z in kernel coordinates is G⁻¹Gz; it should be diag(λ)
    let mk = linalg::solve(&gram, &gz)?;
    let lambdas = b.zero_values();
    let mut eigen_residual: f64 = 0.0;
    for j in 0..n {
        let mut col = mk.column(j).into_owned();
        col[j] -= lambdas[j];
        eigen_residual = eigen_residual.max((&coords * col).norm());
    }
    if eigen_residual > EIGEN_TOL {
        return Err(OplabError::Invariant(format!(
            "compressed shift does not fix the kernels (residual {eigen_residual:.3e})"
        )));
    }
    Ok(ModelBasis {
        product: b.clone(),
        kernels,
        gram,
        coords,
        quadrature_points: q.points,
        norm_error,
        eigen_residual,
        gram_cond,
    })
}
