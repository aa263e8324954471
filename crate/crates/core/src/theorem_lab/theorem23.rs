//! Similarity witness `X = θ(R)|_K` for `R = [[T₀, A], [0, V]]` with `V` the
//! coefficient shift truncated to `shift_dim` coordinates.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat, ONE};
use crate::operator::{blaschke_of_operator, Operator};
use crate::scalar_fn::{BlaschkeProduct, RationalFunction};

/// Default ℓ¹ tail of the Taylor series of `θ` beyond the reserve.
pub const DEFAULT_TAIL_TARGET: f64 = 1e-10;
pub const MAX_TAIL_BOUND: f64 = 1e-3;
pub const ZERO_BLOCK_TOL: f64 = 1e-9;
/// Slack for the singular-value comparison when the tail is exactly zero.
const ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem23Report {
    pub shift_dim: usize,
    /// Trailing coordinates excluded from the lower-bound certificate.
    pub reserve: usize,
    /// `Σ_{k ≥ reserve} |θ̂(k)|`.
    pub tail_bound: f64,
    /// `max(‖θ(R)₀₀‖, ‖θ(R)₁₀‖)`: the blocks that must vanish.
    pub zero_block_residual: f64,
    /// `‖T₀A_θ + Aθ(V) − A_θV‖`.
    pub identity_residual: f64,
    /// `max |θ(V) − Toeplitz(θ̂)|` against the Taylor coefficients.
    pub toeplitz_residual: f64,
    /// Smallest singular value of `X` on the first `shift_dim − reserve`
    /// coordinates.
    pub retained_min_singular: f64,
    pub a_theta_norm: f64,
    pub zero_blocks_ok: bool,
    pub identity_ok: bool,
    pub lower_bound_ok: bool,
}

impl Theorem23Report {
    pub fn passed(&self) -> bool {
        self.zero_blocks_ok && self.identity_ok && self.lower_bound_ok
    }
}

pub fn shift(dim: usize) -> CMat {
    let mut v = CMat::zeros(dim, dim);
    for k in 1..dim {
        v[(k, k - 1)] = ONE;
    }
    v
}

/// Taylor coefficients of `θ` and the smallest `d` whose ℓ¹ tail is at most
/// `target`, with that tail.
pub fn tail_reserve(theta: &BlaschkeProduct, target: f64, horizon: usize) -> Result<(Vec<Complex64>, usize, f64)> {
    let r = theta.zeros().iter().map(|z| z.modulus()).fold(0.0, f64::max);
    // enough terms that the neglected remainder is far below the target
    let extra = if r > 0.0 { ((1e-20f64).ln() / r.ln()).ceil() as usize } else { 1 };
    let count = horizon + extra.max(theta.len() + 1) + 64;
    let coeffs = RationalFunction::from_blaschke(theta).taylor_coefficients(count);
    let mut tails = vec![0.0; count + 1];
    for k in (0..count).rev() {
        tails[k] = tails[k + 1] + coeffs[k].norm();
    }
    let d = (0..=count).find(|&k| tails[k] <= target).unwrap_or(count);
    Ok((coeffs, d, tails[d]))
}

pub fn verify_theorem23(t0: &CMat, a: &CMat, theta: &BlaschkeProduct, shift_dim: usize, tail_target: f64) -> Result<Theorem23Report> {
    let h0 = t0.nrows();
    if t0.ncols() != h0 || a.nrows() != h0 || a.ncols() > shift_dim {
        return Err(OplabError::Dimension(format!(
            "T₀ is {}x{}, A is {}x{}, shift dimension {shift_dim}",
            t0.nrows(),
            t0.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    if theta.is_empty() {
        return Err(OplabError::Precondition("θ needs at least one zero".into()));
    }
    if !(tail_target > 0.0 && tail_target <= MAX_TAIL_BOUND) {
        return Err(OplabError::Precondition(format!("tail target {tail_target:e} outside (0, {MAX_TAIL_BOUND:e}]")));
    }
    let t0_op = Operator::new(t0.clone())?;
    let annihilation = blaschke_of_operator(theta, &t0_op)?.norm();
    if annihilation > 1e-8 * t0_op.norm().max(1.0) {
        return Err(OplabError::Precondition(format!("θ(T₀) ≠ 0 (norm {annihilation:.3e})")));
    }
    let (coeffs, reserve, tail_bound) = tail_reserve(theta, tail_target, shift_dim)?;
    if reserve >= shift_dim || tail_bound > MAX_TAIL_BOUND {
        return Err(OplabError::ShiftTooSmall(format!(
            "need {reserve} reserved coordinates for tail {tail_bound:.3e}, have {shift_dim}"
        )));
    }

    let v = shift(shift_dim);
    let mut a_full = CMat::zeros(h0, shift_dim);
    a_full.view_mut((0, 0), (h0, a.ncols())).copy_from(a);
    let n = h0 + shift_dim;
    let mut r = CMat::zeros(n, n);
    r.view_mut((0, 0), (h0, h0)).copy_from(t0);
    r.view_mut((0, h0), (h0, shift_dim)).copy_from(&a_full);
    r.view_mut((h0, h0), (shift_dim, shift_dim)).copy_from(&v);
    let th = blaschke_of_operator(theta, &Operator::new(r)?)?;

    let upper_left = th.view((0, 0), (h0, h0)).into_owned();
    let lower_left = th.view((h0, 0), (shift_dim, h0)).into_owned();
    let a_theta = th.view((0, h0), (h0, shift_dim)).into_owned();
    let theta_v = th.view((h0, h0), (shift_dim, shift_dim)).into_owned();
    let zero_block_residual = linalg::spectral_norm(&upper_left).max(linalg::spectral_norm(&lower_left));
    let identity_residual = linalg::spectral_norm(&(t0 * &a_theta + &a_full * &theta_v - &a_theta * &v));
    let toeplitz = CMat::from_fn(shift_dim, shift_dim, |i, j| if i >= j { coeffs[i - j] } else { linalg::ZERO });
    let toeplitz_residual = linalg::max_abs_diff(&theta_v, &toeplitz);

    let retained = shift_dim - reserve;
    let x = th.view((0, h0), (n, retained)).into_owned();
    let retained_min_singular = linalg::min_singular_value(&x);
    Ok(Theorem23Report {
        shift_dim,
        reserve,
        tail_bound,
        zero_block_residual,
        identity_residual,
        toeplitz_residual,
        retained_min_singular,
        a_theta_norm: linalg::spectral_norm(&a_theta),
        zero_blocks_ok: zero_block_residual < ZERO_BLOCK_TOL,
        identity_ok: identity_residual < tail_bound + 1e-9,
        lower_bound_ok: retained_min_singular >= 1.0 - tail_bound - ROUNDOFF,
    })
}

/// Zeros `1 − 2^{−k}`, `k = 1..=n`.
pub fn geometric_zeros(n: usize) -> Vec<Complex64> {
    (1..=n).map(|k| Complex64::new(1.0 - 0.5f64.powi(k as i32), 0.0)).collect()
}

/// `T₀ = S diag(zeros) S⁻¹` with `S = I + 0.3G`, and `A` Gaussian scaled by
/// `1/√shift_dim`, both from `seed`.
pub fn random_theorem23_data(zeros: &[Complex64], shift_dim: usize, seed: u64) -> Result<(CMat, CMat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> Complex64 {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    };
    let h0 = zeros.len();
    let s = linalg::identity(h0) + CMat::from_fn(h0, h0, |_, _| gauss() * 0.3);
    let t0 = &s * linalg::diag(zeros) * linalg::inverse(&s)?;
    let scale = 1.0 / (shift_dim as f64).sqrt();
    let a = CMat::from_fn(h0, shift_dim, |_, _| gauss() * scale);
    Ok((t0, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn decoupled_case() {
        let theta = BlaschkeProduct::from_complex(&[c(0.5)]).unwrap();
        let t0 = CMat::from_element(1, 1, c(0.5));
        let r = verify_theorem23(&t0, &CMat::zeros(1, 0), &theta, 64, DEFAULT_TAIL_TARGET).unwrap();
        assert_eq!(r.a_theta_norm, 0.0);
        assert!(r.passed());
        assert!(r.toeplitz_residual < 1e-14);
        // |θ̂(k)| = 0.75·0.5^{k−1} for k ≥ 1, so the tail from d is 1.5·0.5^{d−1}
        let expected = (1..64).find(|&d| 1.5 * 0.5f64.powi(d - 1) <= DEFAULT_TAIL_TARGET).unwrap() as usize;
        assert_eq!(r.reserve, expected);
    }

    #[test]
    fn zero_at_origin_makes_theta_the_shift() {
        let theta = BlaschkeProduct::from_complex(&[c(0.0)]).unwrap();
        let t0 = CMat::zeros(1, 1);
        let a = CMat::from_element(1, 16, c(1.0));
        let r = verify_theorem23(&t0, &a, &theta, 16, DEFAULT_TAIL_TARGET).unwrap();
        assert_eq!(r.reserve, 2);
        assert!(r.identity_residual < 1e-9);
        assert!((r.a_theta_norm - 4.0).abs() < 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn geometric_pipeline() {
        let zs = geometric_zeros(4);
        let theta = BlaschkeProduct::from_complex(&zs).unwrap();
        let (t0, a) = random_theorem23_data(&zs, 256, 3).unwrap();
        let r = verify_theorem23(&t0, &a, &theta, 256, 9e-7).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.tail_bound < 1e-6);
    }

    #[test]
    fn short_window_is_rejected() {
        let zs = geometric_zeros(4);
        let theta = BlaschkeProduct::from_complex(&zs).unwrap();
        let t0 = linalg::diag(&zs);
        let r = verify_theorem23(&t0, &CMat::zeros(4, 0), &theta, 32, DEFAULT_TAIL_TARGET);
        assert!(matches!(r, Err(OplabError::ShiftTooSmall(_))));
        let r = verify_theorem23(&linalg::diag(&[c(0.1)]), &CMat::zeros(1, 0), &theta, 32, 1e-3);
        assert!(matches!(r, Err(OplabError::Precondition(_))));
    }
}
