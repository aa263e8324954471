//! `R = [[T₀, A], [0, T₁]]` with `T₀ = diag(λ)` on `H₀` and `T₁` the
//! compressed shift on the model space, coupled through `a_{jn} = (Ak_n, e_j)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::model::{build_model_basis, ModelBasis};
use crate::error::{OplabError, Result};
use crate::interpolation::carleson_delta;
use crate::linalg::{self, CMat, ZERO};
use crate::operator::{poly_bound_lower, rational_of_operator, Operator};
use crate::scalar_fn::{divided_difference, pseudohyperbolic, BlaschkeProduct, DiskPoint, RationalFunction};
use crate::similarity::{block_conjugation_offdiag, lyapunov_similarity};

/// Below this Carleson constant the intertwiner is reported as ill-conditioned.
pub const DELTA_WARNING: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct Example41Instance {
    pub basis: ModelBasis,
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub lambdas: Vec<Complex64>,
    /// `coupling[(j, n)] = (Ak_n, e_j)`; zero diagonal.
    #[serde(with = "crate::serde_ext::matrix")]
    pub coupling: CMat,
    #[serde(skip)]
    pub t0: Operator,
    #[serde(skip)]
    pub t1: Operator,
    /// `A` from the orthonormal coordinates of `H₁` to the `e`-basis.
    #[serde(skip)]
    pub a: CMat,
    #[serde(skip)]
    pub r: Operator,
    pub delta: f64,
}

impl Example41Instance {
    pub fn new(basis: ModelBasis, coupling: CMat) -> Result<Self> {
        let n = basis.len();
        if coupling.nrows() != n || coupling.ncols() != n {
            return Err(OplabError::Dimension(format!("coupling must be {n}x{n}")));
        }
        if let Some(k) = (0..n).find(|&k| coupling[(k, k)] != ZERO) {
            return Err(OplabError::Invariant(format!("coupling has nonzero diagonal entry a_{k}{k}")));
        }
        let lambdas = basis.lambdas();
        let t0 = Operator::diagonal(&lambdas);
        let t1 = Operator::new(basis.compressed_shift()?)?;
        let a = &coupling * linalg::inverse(&basis.coords)?;
        let mut r = CMat::zeros(2 * n, 2 * n);
        r.view_mut((0, 0), (n, n)).copy_from(t0.matrix());
        r.view_mut((0, n), (n, n)).copy_from(&a);
        r.view_mut((n, n), (n, n)).copy_from(t1.matrix());
        let delta = carleson_delta(basis.product.zeros())?.delta;
        Ok(Example41Instance { basis, lambdas, coupling, t0, t1, a, r: Operator::new(r)?, delta })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Maps kernel coordinates on `H₁` to the orthonormal ones.
    pub fn kernel_to_orthonormal(&self, m: &CMat) -> Result<CMat> {
        Ok(m * linalg::inverse(&self.basis.coords)?)
    }
}

/// Seeded instance: `n` zeros with `|λ| ≤ 0.85` and pairwise pseudohyperbolic
/// distance at least 0.2, and Gaussian coupling with zero diagonal.
pub fn random_instance(n: usize, seed: u64, coupling_scale: f64, quadrature_points: usize) -> Result<Example41Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zeros: Vec<DiskPoint> = Vec::with_capacity(n);
    let mut attempts = 0;
    while zeros.len() < n {
        attempts += 1;
        if attempts > 100_000 {
            return Err(OplabError::Degenerate("could not place separated zeros".into()));
        }
        let r = 0.85 * rng.random::<f64>().sqrt();
        let t = std::f64::consts::TAU * rng.random::<f64>();
        let p = DiskPoint::new(Complex64::from_polar(r, t))?;
        if zeros.iter().all(|q| pseudohyperbolic(*q, p) >= 0.2) {
            zeros.push(p);
        }
    }
    let coupling = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * coupling_scale
    });
    let mut coupling = coupling;
    coupling.fill_diagonal(ZERO);
    let basis = build_model_basis(&BlaschkeProduct::new(zeros)?, quadrature_points)?;
    Example41Instance::new(basis, coupling)
}

fn check_phi(phi: &RationalFunction) -> Result<()> {
    if let Some(p) = phi.poles().iter().find(|p| p.norm() <= 1.0) {
        return Err(OplabError::Invariant(format!("φ has a pole at {p} in the closed disk")));
    }
    Ok(())
}

/// `(A_φ k_n, e_j) = (φ(λ_n) − φ(λ_j))/(λ_n − λ_j) a_{jn}`, kernel coordinates;
/// the diagonal is `φ′(λ_n) a_{nn} = 0`.
pub fn a_phi(inst: &Example41Instance, phi: &RationalFunction) -> Result<CMat> {
    check_phi(phi)?;
    let n = inst.len();
    let mut out = CMat::zeros(n, n);
    for col in 0..n {
        for j in 0..n {
            if j != col {
                out[(j, col)] = divided_difference(phi, inst.lambdas[col], inst.lambdas[j])? * inst.coupling[(j, col)];
            }
        }
    }
    Ok(out)
}

/// `P_{H₀} φ(R)|_{H₁}` from the functional calculus of the assembled `R`,
/// returned in kernel coordinates.
pub fn a_phi_oracle(inst: &Example41Instance, phi: &RationalFunction) -> Result<CMat> {
    check_phi(phi)?;
    let n = inst.len();
    let f = rational_of_operator(phi, &inst.r)?;
    Ok(f.view((0, n), (n, n)) * &inst.basis.coords)
}

/// `B_n / B_n(λ_n)` as a rational function.
pub fn normalized_cofactor(inst: &Example41Instance, n: usize) -> Result<RationalFunction> {
    let bn = inst.basis.product.without(n);
    let v = bn.eval(inst.lambdas[n])?;
    Ok(RationalFunction::from_blaschke(&bn).scale(Complex64::new(1.0, 0.0) / v))
}

/// Column `n` of `A_{B_n/B_n(λ_n)}` for every `n`, in kernel coordinates.
pub fn cofactor_columns(inst: &Example41Instance) -> Result<CMat> {
    let n = inst.len();
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let phi = normalized_cofactor(inst, k)?;
        for j in 0..n {
            if j != k {
                out[(j, k)] = divided_difference(&phi, inst.lambdas[k], inst.lambdas[j])? * inst.coupling[(j, k)];
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct IntertwinerReport {
    /// `Y` in kernel coordinates: column `n` is `Yk_n`.
    #[serde(with = "crate::serde_ext::matrix")]
    pub y_kernel: CMat,
    #[serde(skip)]
    pub y: CMat,
    pub y_norm: f64,
    /// `‖A − (T₀Y − YT₁)‖`.
    pub residual: f64,
    /// `residual / ‖A‖` (absolute when `A = 0`).
    pub relative_residual: f64,
    /// Off-diagonal block after conjugating `R` by `[[I, Y], [0, I]]`,
    /// relative as above.
    pub conjugation_residual: f64,
    pub warning: Option<String>,
}

/// `Yk_n = −A_{B_n/B_n(λ_n)} k_n + α_n e_n`.
pub fn construct_y(inst: &Example41Instance, alpha: &[Complex64]) -> Result<IntertwinerReport> {
    let n = inst.len();
    if alpha.len() != n {
        return Err(OplabError::Dimension(format!("α has length {}, expected {n}", alpha.len())));
    }
    let mut y_kernel = -cofactor_columns(inst)?;
    for k in 0..n {
        y_kernel[(k, k)] += alpha[k];
    }
    let y = inst.kernel_to_orthonormal(&y_kernel)?;
    let t0 = inst.t0.matrix();
    let t1 = inst.t1.matrix();
    let residual = linalg::spectral_norm(&(&inst.a - (t0 * &y - &y * t1)));
    let off = block_conjugation_offdiag(t0, t1, &inst.a, &y);
    let a_norm = linalg::spectral_norm(&inst.a);
    let denom = if a_norm > 0.0 { a_norm } else { 1.0 };
    let warning = (inst.delta < DELTA_WARNING)
        .then(|| format!("Carleson constant {:.3e} is below {DELTA_WARNING:e}; Y is ill-conditioned", inst.delta));
    Ok(IntertwinerReport {
        y_norm: linalg::spectral_norm(&y),
        y_kernel,
        y,
        residual,
        relative_residual: residual / denom,
        conjugation_residual: linalg::spectral_norm(&off) / denom,
        warning,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvectorReport {
    /// `‖Rv_n − λ_n v_n‖ / ‖v_n‖` for `v_n = A_{B_n/B_n(λ_n)} k_n ⊕ k_n`.
    pub residuals: Vec<f64>,
    pub norms: Vec<f64>,
    /// Upper estimate of the polynomial bound of `R` from a Stein witness.
    pub m_upper: f64,
    /// Lower estimate of the polynomial bound from candidate polynomials.
    pub m_lower: f64,
    pub delta: f64,
    /// `(M²/δ² + 1)^{1/2}` with `M = m_upper`.
    pub norm_ceiling: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

pub fn eigenvectors(inst: &Example41Instance) -> Result<CMat> {
    let n = inst.len();
    let cols = cofactor_columns(inst)?;
    let mut v = CMat::zeros(2 * n, n);
    v.view_mut((0, 0), (n, n)).copy_from(&cols);
    v.view_mut((n, 0), (n, n)).copy_from(&inst.basis.coords);
    Ok(v)
}

pub fn eigen_residuals(r: &CMat, lambdas: &[Complex64], v: &CMat) -> Vec<f64> {
    let rv = r * v;
    (0..v.ncols())
        .map(|k| (rv.column(k) - v.column(k) * lambdas[k]).norm() / v.column(k).norm())
        .collect()
}

pub fn eigenvector_check(inst: &Example41Instance, poly_seed: u64) -> Result<EigenvectorReport> {
    let v = eigenvectors(inst)?;
    let residuals = eigen_residuals(inst.r.matrix(), &inst.lambdas, &v);
    let norms: Vec<f64> = v.column_iter().map(|c| c.norm()).collect();
    let w = lyapunov_similarity(&inst.r)?;
    let m_upper = w.witness.cond * w.witness.conjugated_norm.max(1.0);
    let m_lower = poly_bound_lower(&inst.r, 8, 8, poly_seed)?.value;
    let delta = inst.delta;
    let norm_ceiling = (m_upper * m_upper / (delta * delta) + 1.0).sqrt();
    let lower_ok = norms.iter().all(|&x| x >= 1.0 - 1e-10);
    let upper_ok = norms.iter().all(|&x| x <= norm_ceiling);
    Ok(EigenvectorReport { residuals, norms, m_upper, m_lower, delta, norm_ceiling, lower_ok, upper_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::scalar_fn::hardy::DEFAULT_QUAD_POINTS;

    fn instance(zs: &[Complex64], coupling: CMat) -> Example41Instance {
        let b = BlaschkeProduct::from_complex(zs).unwrap();
        Example41Instance::new(build_model_basis(&b, DEFAULT_QUAD_POINTS).unwrap(), coupling).unwrap()
    }

    fn zs() -> Vec<Complex64> {
        vec![c(0.2), Complex64::new(-0.3, 0.4), Complex64::new(0.5, -0.5)]
    }

    fn coupling() -> CMat {
        CMat::from_row_slice(3, 3, &[c(0.0), c(1.0), Complex64::new(0.0, -0.5), c(0.3), c(0.0), c(2.0), Complex64::new(0.7, 0.1), c(-1.0), c(0.0)])
    }

    #[test]
    fn a_phi_examples() {
        let inst = instance(&zs(), coupling());
        let one = a_phi(&inst, &RationalFunction::constant(c(1.0))).unwrap();
        assert_eq!(linalg::spectral_norm(&one), 0.0);
        let z = a_phi(&inst, &RationalFunction::identity()).unwrap();
        assert!(linalg::max_abs_diff(&z, &inst.coupling) < 1e-15);
        let oracle = a_phi_oracle(&inst, &RationalFunction::identity()).unwrap();
        assert!(linalg::max_abs_diff(&oracle, &inst.coupling) < 1e-12);
        let b = RationalFunction::from_blaschke(&inst.basis.product);
        assert!(linalg::spectral_norm(&a_phi(&inst, &b).unwrap()) < 1e-9);
        assert!(linalg::spectral_norm(&a_phi_oracle(&inst, &b).unwrap()) < 1e-9);
    }

    #[test]
    fn oracle_pair_on_blaschke_factor() {
        let inst = random_instance(5, 11, 1.0, DEFAULT_QUAD_POINTS).unwrap();
        let phi = RationalFunction::blaschke_factor(DiskPoint::real(0.3).unwrap());
        let x = a_phi(&inst, &phi).unwrap();
        let y = a_phi_oracle(&inst, &phi).unwrap();
        assert!(linalg::spectral_norm(&(&x - &y)) < 1e-8 * linalg::spectral_norm(&y));
    }

    #[test]
    fn nonzero_diagonal_rejected() {
        let b = BlaschkeProduct::from_complex(&[c(0.1), c(0.4)]).unwrap();
        let basis = build_model_basis(&b, DEFAULT_QUAD_POINTS).unwrap();
        assert!(Example41Instance::new(basis, linalg::identity(2)).is_err());
    }

    #[test]
    fn uncoupled_intertwiner() {
        let inst = instance(&zs(), CMat::zeros(3, 3));
        let r = construct_y(&inst, &[ZERO; 3]).unwrap();
        assert_eq!(r.y_norm, 0.0);
        assert_eq!(r.residual, 0.0);
        let alpha = [c(1.0), Complex64::new(0.0, 2.0), c(-0.5)];
        let r = construct_y(&inst, &alpha).unwrap();
        assert!(r.residual < 1e-12);
        let e = eigenvector_check(&inst, 1).unwrap();
        assert!(e.residuals.iter().all(|&x| x < 1e-12));
        assert!(e.norms.iter().all(|&x| (x - 1.0).abs() < 1e-10));
    }

    #[test]
    fn alpha_moves_only_diagonal() {
        let inst = instance(&zs(), coupling());
        let y0 = construct_y(&inst, &[ZERO; 3]).unwrap();
        let alpha = [c(0.5), c(-1.0), Complex64::new(0.0, 1.0)];
        let y1 = construct_y(&inst, &alpha).unwrap();
        let diff = &y1.y_kernel - &y0.y_kernel;
        assert!(linalg::max_abs_diff(&diff, &linalg::diag(&alpha)) < 1e-15);
        assert!(y1.relative_residual < 1e-10 && y0.relative_residual < 1e-10);
        assert!(y1.conjugation_residual < 1e-10);
    }

    #[test]
    fn eigenvectors_of_coupled_instance() {
        let inst = random_instance(6, 5, 1.0, DEFAULT_QUAD_POINTS).unwrap();
        let e = eigenvector_check(&inst, 2).unwrap();
        assert!(e.residuals.iter().all(|&x| x < 1e-8), "{:?}", e.residuals);
        assert!(e.lower_ok && e.upper_ok);
        assert!(e.m_lower <= e.m_upper * (1.0 + 1e-8));
    }

    #[test]
    fn eigen_residual_is_first_order_in_coupling_error() {
        let inst = random_instance(4, 9, 1.0, DEFAULT_QUAD_POINTS).unwrap();
        let v = eigenvectors(&inst).unwrap();
        let mut prev = None;
        for eps in [1e-4, 1e-5, 1e-6] {
            let mut bumped = inst.coupling.clone();
            bumped[(0, 1)] += c(eps);
            let other = Example41Instance::new(inst.basis.clone(), bumped).unwrap();
            let r = eigen_residuals(other.r.matrix(), &inst.lambdas, &v).into_iter().fold(0.0, f64::max);
            if let Some(p) = prev {
                let ratio: f64 = p / r;
                assert!((ratio - 10.0).abs() < 0.1, "ratio {ratio}");
            }
            prev = Some(r);
        }
    }
}
