//! The basis `x_{2n} = e_{2n}`, `x_{2n+1} = e_{2n+1} + Σ_{k≥n} a_{k−n} e_{2k}`
//! and the operator `T x_n = λ_n x_n`.
//!
//! Internally vectors use the block ordering `(e_0, e_2, …, e_1, e_3, …)`.
//! There `X = [[I, Aα], [0, I]]` with `Aα` lower-triangular Toeplitz, and for
//! any `f` on the spectrum `f(T) = [[F₀, Aα F₁ − F₀ Aα], [0, F₁]]`. Norms of
//! such operators are computed by power iteration with Toeplitz products, so
//! no dense `N × N` matrix is formed.

use num_complex::Complex64;
use serde::Serialize;

use super::sequence::{check_gaps, CoeffSequence};
use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat, CVec, ZERO};

/// Largest accepted `cond(X)`.
pub const MAX_BASIS_COND: f64 = 1e12;
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;
const NORM_REL_TOL: f64 = 1e-12;
const KRYLOV_BLOCK: usize = 40;
const KRYLOV_RESTARTS: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct LeMerdyInstance {
    pub n: usize,
    pub sequence: CoeffSequence,
    /// `g_k = 1 − λ_k`, kept exactly.
    pub gaps: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// `‖Aα‖`, the norm of the `N/2 × N/2` Toeplitz section.
    pub toeplitz_norm: f64,
    /// `‖X‖‖X⁻¹‖ = ((s + √(s²+4))/2)²` with `s = ‖Aα‖`.
    pub basis_cond: f64,
    /// `max_n ‖T x_n − λ_n x_n‖`.
    pub eigen_residual: f64,
}

/// Values of a function on the spectrum, split as in the block ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralValues {
    /// At `λ_0, λ_2, …`.
    pub even: Vec<Complex64>,
    /// At `λ_1, λ_3, …`.
    pub odd: Vec<Complex64>,
}

impl SpectralValues {
    fn max_abs(&self) -> f64 {
        self.even.iter().chain(&self.odd).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `out_k = Σ_{j ≤ k} a_{k−j} v_j`.
fn toeplitz_apply(a: &[f64], v: &[Complex64]) -> Vec<Complex64> {
    let m = v.len();
    let mut out = vec![ZERO; m];
    for (j, &vj) in v.iter().enumerate() {
        if vj == ZERO {
            continue;
        }
        for (o, &ak) in out[j..].iter_mut().zip(&a[..m - j]) {
            *o += vj * ak;
        }
    }
    out
}

/// `out_j = Σ_{k ≥ j} a_{k−j} p_k`.
fn toeplitz_apply_transpose(a: &[f64], p: &[Complex64]) -> Vec<Complex64> {
    let m = p.len();
    (0..m).map(|j| p[j..].iter().zip(&a[..m - j]).map(|(&pk, &ak)| pk * ak).sum()).collect()
}

impl LeMerdyInstance {
    pub fn half(&self) -> usize {
        self.n / 2
    }

    /// The Toeplitz coefficients `a_0, …, a_{N/2−1}` that enter `Aα`.
    pub fn coefficients(&self) -> &[f64] {
        &self.sequence.a[..self.half()]
    }

    fn coupled(&self) -> bool {
        self.coefficients().iter().any(|&x| x != 0.0)
    }

    /// Block-ordered position of the standard index `k`.
    pub fn block_position(&self, k: usize) -> usize {
        if k.is_multiple_of(2) {
            k / 2
        } else {
            self.half() + k / 2
        }
    }

    pub fn spectral_values<F: Fn(usize) -> Complex64>(&self, f: F) -> SpectralValues {
        let m = self.half();
        SpectralValues { even: (0..m).map(|k| f(2 * k)).collect(), odd: (0..m).map(|k| f(2 * k + 1)).collect() }
    }

    /// `f(T) x` in the block ordering.
    pub fn apply(&self, f: &SpectralValues, x: &CVec) -> CVec {
        let m = self.half();
        let a = self.coefficients();
        let (u, v) = (&x.as_slice()[..m], &x.as_slice()[m..]);
        let av = toeplitz_apply(a, v);
        let f1v: Vec<Complex64> = v.iter().zip(&f.odd).map(|(x, f)| x * f).collect();
        let af1v = toeplitz_apply(a, &f1v);
        CVec::from_iterator(
            2 * m,
            (0..m).map(|k| f.even[k] * (u[k] - av[k]) + af1v[k]).chain(f1v.iter().copied()),
        )
    }

    /// `f(T)* y` in the block ordering.
    pub fn apply_adjoint(&self, f: &SpectralValues, y: &CVec) -> CVec {
        let m = self.half();
        let a = self.coefficients();
        let (p, q) = (&y.as_slice()[..m], &y.as_slice()[m..]);
        let f0p: Vec<Complex64> = p.iter().zip(&f.even).map(|(x, f)| x * f.conj()).collect();
        let atp = toeplitz_apply_transpose(a, p);
        let atf0p = toeplitz_apply_transpose(a, &f0p);
        CVec::from_iterator(
            2 * m,
            f0p.iter().copied().chain((0..m).map(|j| f.odd[j].conj() * (atp[j] + q[j]) - atf0p[j])),
        )
    }

    /// `‖f(T)‖`, warm-started from `start` when given; also returns the final
    /// right vector. Exact `max |f|` when the basis is orthonormal.
    pub fn norm_from(&self, f: &SpectralValues, start: Option<CVec>) -> (f64, CVec) {
        if !self.coupled() {
            return (f.max_abs(), start.unwrap_or_else(|| linalg::start_vector(self.n)));
        }
        let generic = linalg::start_vector(self.n);
        // a warm start alone can be orthogonal to the new top singular
        // vector; the generic vector keeps every direction present
        let start = match start {
            Some(w) if w.norm() > 0.0 => w.unscale(w.norm()) + generic.unscale(generic.norm()),
            _ => generic,
        };
        linalg::krylov_norm_from(
            start,
            |x| self.apply(f, x),
            |y| self.apply_adjoint(f, y),
            NORM_REL_TOL,
            KRYLOV_BLOCK,
            KRYLOV_RESTARTS,
        )
    }

    pub fn norm_of(&self, f: &SpectralValues) -> f64 {
        self.norm_from(f, None).0
    }

    /// Basis matrix with columns `x_0, …, x_{N−1}` in the standard ordering.
    pub fn x_basis(&self) -> CMat {
        let n = self.n;
        let a = self.coefficients();
        let mut x = linalg::identity(n);
        for j in 0..self.half() {
            for k in j..self.half() {
                x[(2 * k, 2 * j + 1)] = Complex64::new(a[k - j], 0.0);
            }
        }
        x
    }

    /// `(D₀, D₁, A)` with `A_{kj} = a_{k−j}(λ_{2j+1} − λ_{2k})` evaluated from
    /// the gaps.
    pub fn blocks(&self) -> (CMat, CMat, CMat) {
        let m = self.half();
        let a = self.coefficients();
        let d0 = CMat::from_fn(m, m, |i, j| if i == j { Complex64::new(self.lambdas[2 * i], 0.0) } else { ZERO });
        let d1 = CMat::from_fn(m, m, |i, j| if i == j { Complex64::new(self.lambdas[2 * i + 1], 0.0) } else { ZERO });
        let coupling = CMat::from_fn(m, m, |k, j| {
            if k >= j {
                Complex64::new(a[k - j] * (self.gaps[2 * k] - self.gaps[2 * j + 1]), 0.0)
            } else {
                ZERO
            }
        });
        (d0, d1, coupling)
    }

    /// `T` in the block ordering: `[[D₀, A], [0, D₁]]`, upper triangular.
    pub fn t_block(&self) -> CMat {
        let m = self.half();
        let (d0, d1, coupling) = self.blocks();
        let mut t = CMat::zeros(self.n, self.n);
        t.view_mut((0, 0), (m, m)).copy_from(&d0);
        t.view_mut((0, m), (m, m)).copy_from(&coupling);
        t.view_mut((m, m), (m, m)).copy_from(&d1);
        t
    }

    /// `T` in the standard ordering.
    pub fn t_matrix(&self) -> CMat {
        let tb = self.t_block();
        CMat::from_fn(self.n, self.n, |i, j| tb[(self.block_position(i), self.block_position(j))])
    }
}

/// Largest singular value of the `m × m` lower-triangular Toeplitz section.
fn toeplitz_section_norm(a: &[f64]) -> f64 {
    let m = a.len();
    if a.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let start = CVec::from_element(m, Complex64::new(1.0, 0.0));
    linalg::power_norm_from(
        start,
        |x| CVec::from_vec(toeplitz_apply(a, x.as_slice())),
        |y| CVec::from_vec(toeplitz_apply_transpose(a, y.as_slice())),
        1e-13,
        5000,
    )
    .0
}

/// `max_j ‖(T − λ_{2j+1}) x_{2j+1}‖`: the top block of that vector is
/// `(D₀ − λ_{2j+1})Aα e_j + A e_j`, formed from `λ` in floating point and
/// from the gaps in `A`.
fn eigen_residual(a: &[f64], lambdas: &[f64], gaps: &[f64]) -> f64 {
    let m = a.len();
    let mut worst: f64 = 0.0;
    for j in 0..m {
        let mu = lambdas[2 * j + 1];
        let r2: f64 = (j..m)
            .map(|k| {
                let r = a[k - j] * (lambdas[2 * k] - mu) + a[k - j] * (gaps[2 * k] - gaps[2 * j + 1]);
                r * r
            })
            .sum();
        worst = worst.max(r2.sqrt());
    }
    worst
}

pub fn build_instance(sequence: &CoeffSequence, gaps: &[f64], n: usize) -> Result<LeMerdyInstance> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(OplabError::Precondition(format!("dimension {n} must be even and at least 2")));
    }
    if gaps.len() < n || sequence.len() < n / 2 {
        return Err(OplabError::Dimension(format!(
            "need {n} eigenvalues and {} coefficients, got {} and {}",
            n / 2,
            gaps.len(),
            sequence.len()
        )));
    }
    let gaps = gaps[..n].to_vec();
    check_gaps(&gaps)?;
    let lambdas: Vec<f64> = gaps.iter().map(|g| 1.0 - g).collect();
    let a = &sequence.a[..n / 2];
    let s = toeplitz_section_norm(a);
    let root = 0.5 * (s + (s * s + 4.0).sqrt());
    let basis_cond = root * root;
    if !(basis_cond <= MAX_BASIS_COND) {
        return Err(OplabError::NotABasis(format!("basis condition number {basis_cond:.3e}")));
    }
    let eigen_residual = eigen_residual(a, &lambdas, &gaps);
    if !(eigen_residual < EIGEN_RESIDUAL_TOL) {
        return Err(OplabError::Invariant(format!("T x_n ≠ λ_n x_n (residual {eigen_residual:.3e})")));
    }
    Ok(LeMerdyInstance { n, sequence: sequence.clone(), gaps, lambdas, toeplitz_norm: s, basis_cond, eigen_residual })
}
