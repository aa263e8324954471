//! Constants of a Le Merdy instance: basis projections, sign-pattern
//! multipliers, powers, resolvents and polynomials of `T`, plus the Hankel and
//! Toeplitz sections of the coefficient sequence.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::instance::LeMerdyInstance;
use super::sequence::CoeffSequence;
use crate::error::{OplabError, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::operator::bounds::{poly_bound_lower_with, PolyBound, ASCENT_ROUNDS};
use crate::scalar_fn::poly;

/// `‖P_n‖` for `n = 0, …, N−1`, where `P_n` keeps `x_0, …, x_n` and kills the
/// rest.
pub fn projection_norms(inst: &LeMerdyInstance) -> Vec<f64> {
    let mut warm = None;
    (0..inst.n)
        .map(|n| {
            let f = inst.spectral_values(|k| c(if k <= n { 1.0 } else { 0.0 }));
            let (v, x) = inst.norm_from(&f, warm.take());
            warm = Some(x);
            v
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnconditionalReport {
    /// Lower bound for `sup_ε ‖X D_ε X⁻¹‖`.
    pub value: f64,
    /// Signs `ε_k` in the standard ordering.
    pub pattern: Vec<i8>,
    pub evaluations: usize,
}

fn sign_norm(inst: &LeMerdyInstance, signs: &[i8], warm: Option<CVec>) -> (f64, CVec) {
    inst.norm_from(&inst.spectral_values(|k| c(signs[k] as f64)), warm)
}

/// Lower bound for the unconditional constant of the basis. Candidates are
/// the pattern `+` on even and `−` on odd indices, improved by single sign
/// flips on up to `flip_budget` evenly spread coordinates, and `samples`
/// random patterns from `seed`. Adding samples never lowers the result.
pub fn unconditional_constant(inst: &LeMerdyInstance, samples: usize, seed: u64, flip_budget: usize) -> Result<UnconditionalReport> {
    if samples < 1 {
        return Err(OplabError::Precondition("need at least one sign-pattern sample".into()));
    }
    let n = inst.n;
    let mut evaluations = 0;
    let mut pattern: Vec<i8> = (0..n).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect();
    let (mut value, mut warm) = sign_norm(inst, &pattern, None);
    evaluations += 1;
    let flips = flip_budget.min(n);
    for i in 0..flips {
        let k = i * n / flips.max(1);
        pattern[k] = -pattern[k];
        let (v, x) = sign_norm(inst, &pattern, Some(warm.clone()));
        evaluations += 1;
        if v > value {
            value = v;
            warm = x;
        } else {
            pattern[k] = -pattern[k];
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let signs: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let (v, _) = sign_norm(inst, &signs, None);
        evaluations += 1;
        if v > value {
            value = v;
            pattern = signs;
        }
    }
    Ok(UnconditionalReport { value: value.max(1.0), pattern, evaluations })
}

/// Power sample points: every `n ≤ 64`, then a geometric ladder with ratio
/// about 1.1, always ending at `horizon`.
pub fn power_samples(horizon: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=horizon.min(64)).collect();
    let mut x = 64.0f64;
    while (x as usize) < horizon {
        x *= 1.1;
        let k = (x.round() as usize).min(horizon);
        if k > *out.last().unwrap() {
            out.push(k);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledPowerBound {
    pub value: f64,
    pub argmax: usize,
    pub horizon: usize,
    pub samples: usize,
}

/// `max ‖Tⁿ‖` over `power_samples(horizon)`, with `λⁿ = exp(n log1p(−g))`.
pub fn power_bound_sampled(inst: &LeMerdyInstance, horizon: usize) -> SampledPowerBound {
    let ns = power_samples(horizon);
    let mut best = SampledPowerBound { value: 0.0, argmax: 0, horizon, samples: ns.len() };
    let mut warm = None;
    for &p in &ns {
        let f = inst.spectral_values(|k| c((p as f64 * (-inst.gaps[k]).ln_1p()).exp()));
        let (v, x) = inst.norm_from(&f, warm.take());
        warm = Some(x);
        if v > best.value {
            best.value = v;
            best.argmax = p;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventConstant {
    pub value: f64,
    #[serde(with = "crate::serde_ext::complex")]
    pub argmax: Complex64,
    pub evaluated: usize,
}

/// `max |z − 1| ‖(T − z)⁻¹‖` over `z = r e^{it}`; `λ − z` is formed as
/// `(1 − z) − g` so that eigenvalues rounding to 1 keep their distance.
pub fn tadmor_ritt_structured(inst: &LeMerdyInstance, radii: &[f64], angles: usize) -> Result<ResolventConstant> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 1.0)) || angles == 0 {
        return Err(OplabError::Precondition("radii must be > 1 and angles positive".into()));
    }
    let mut best = ResolventConstant { value: 0.0, argmax: c(0.0), evaluated: 0 };
    for &r in radii {
        let mut warm = None;
        for j in 0..angles {
            let z = Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / angles as f64);
            let w = c(1.0) - z;
            let f = inst.spectral_values(|k| c(1.0) / (w - inst.gaps[k]));
            let (v, x) = inst.norm_from(&f, warm.take());
            warm = Some(x);
            best.evaluated += 1;
            let value = w.norm() * v;
            if value > best.value {
                best.value = value;
                best.argmax = z;
            }
        }
    }
    Ok(best)
}

/// Lower estimate of the polynomial bound of `T` with structured norms.
pub fn poly_bound_structured(inst: &LeMerdyInstance, degree: usize, trials: usize, seed: u64) -> Result<PolyBound> {
    let lams: Vec<Complex64> = inst.lambdas.iter().map(|&l| c(l)).collect();
    poly_bound_lower_with(
        |p| inst.norm_of(&inst.spectral_values(|k| poly::eval(p, lams[k]))),
        degree,
        trials,
        seed,
        ASCENT_ROUNDS,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionNorms {
    pub size: usize,
    /// `‖(a_{j+k})_{j,k<size}‖`.
    pub hankel: f64,
    /// `‖(a_{j−k})_{j≥k}‖`.
    pub toeplitz: f64,
}

/// Largest singular value of a dense real matrix.
fn real_norm(m: &DMatrix<f64>) -> f64 {
    let mc: CMat = m.map(|x| Complex64::new(x, 0.0));
    let mt = mc.adjoint();
    linalg::krylov_norm_from(linalg::start_vector(m.ncols()), |x| &mc * x, |y| &mt * y, 1e-13, 40, 20).0
}

/// `cond(P^{1/2})` for the Stein solution `P − T*PT = I`, from the closed
/// form `P = X⁻ᵀ C X⁻¹`, `C_ij = (XᵀX)_ij / (1 − λ_i λ_j)`, where
/// `1 − λ_i λ_j = g_i + g_j − g_i g_j` is exact in the gaps.
///
/// With `D = diag(g)` and `D^{1/2} C D^{1/2} = K = LLᵀ`, the witness has the
/// condition number of `B = Lᵀ D^{−1/2} X⁻¹`, i.e. `‖B‖ ‖X D^{1/2} L⁻ᵀ‖`.
/// `K` has entries of order one however small the gaps are.
pub fn stein_cond_structured(inst: &LeMerdyInstance) -> Result<f64> {
    let n = inst.n;
    let m = inst.half();
    let a = inst.coefficients();
    // block ordering: evens first
    let g: Vec<f64> = (0..m).map(|k| inst.gaps[2 * k]).chain((0..m).map(|k| inst.gaps[2 * k + 1])).collect();
    let root: Vec<f64> = g.iter().map(|x| x.sqrt()).collect();
    let toeplitz = DMatrix::from_fn(m, m, |k, j| if k >= j { a[k - j] } else { 0.0 });
    let mut x = DMatrix::<f64>::identity(n, n);
    x.view_mut((0, m), (m, m)).copy_from(&toeplitz);
    let mut x_inv = DMatrix::<f64>::identity(n, n);
    x_inv.view_mut((0, m), (m, m)).copy_from(&(-&toeplitz));
    let w = x.transpose() * &x;
    let k = DMatrix::from_fn(n, n, |i, j| {
        let r = root[i] / root[j];
        w[(i, j)] / (r + 1.0 / r - root[i] * root[j])
    });
    let l = k
        .cholesky()
        .ok_or_else(|| OplabError::Degenerate("graded Stein kernel is not positive definite".into()))?
        .l();
    let l_inv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| OplabError::Degenerate("singular Cholesky factor".into()))?;
    // scale D^{−1/2} by √g_min so that every entry stays below one
    let floor = root.iter().copied().fold(f64::INFINITY, f64::min);
    let mut scaled = x_inv;
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= floor / root[i];
    }
    let b_scaled = l.transpose() * scaled;
    let mut inv = x;
    for (j, mut col) in inv.column_iter_mut().enumerate() {
        col *= root[j];
    }
    let b_inv = inv * l_inv.transpose();
    let cond = (real_norm(&b_scaled) / floor) * real_norm(&b_inv);
    if !cond.is_finite() {
        return Err(OplabError::Degenerate(format!("Stein condition number overflowed ({cond})")));
    }
    Ok(cond)
}

pub fn hankel_matrix(a: &[f64], size: usize) -> CMat {
    CMat::from_fn(size, size, |j, k| c(a[j + k]))
}

pub fn toeplitz_matrix(a: &[f64], size: usize) -> CMat {
    CMat::from_fn(size, size, |j, k| if j >= k { c(a[j - k]) } else { c(0.0) })
}

fn section_norm(m: &CMat) -> f64 {
    if m.iter().all(|z| z.norm() == 0.0) {
        return 0.0;
    }
    let mh = m.adjoint();
    // entries are nonnegative for the built-in sequences, so the all-ones
    // start has a component along the Perron vector
    let start = CVec::from_element(m.ncols(), c(1.0));
    linalg::power_norm_from(start, |x| m * x, |y| &mh * y, 1e-13, 5000).0
}

pub fn hankel_toeplitz_norms(seq: &CoeffSequence, sizes: &[usize]) -> Result<Vec<SectionNorms>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes.first() == Some(&0) {
        return Err(OplabError::Precondition("sizes must be positive and ascending".into()));
    }
    if let Some(&m) = sizes.last() {
        if seq.len() < 2 * m - 1 {
            return Err(OplabError::Dimension(format!("size {m} needs {} coefficients, have {}", 2 * m - 1, seq.len())));
        }
    }
    Ok(sizes
        .iter()
        .map(|&m| SectionNorms {
            size: m,
            hankel: section_norm(&hankel_matrix(&seq.a, m)),
            toeplitz: section_norm(&toeplitz_matrix(&seq.a, m)),
        })
        .collect())
}
