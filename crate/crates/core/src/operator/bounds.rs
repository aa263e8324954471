//! Boundedness constants: power bound, a lower estimate of the polynomial
//! bound, and the Tadmor–Ritt resolvent constant.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::Operator;
use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat, CVec, ONE, ZERO};

pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBound {
    /// `max_{0 ≤ n ≤ horizon} ‖Tⁿ‖`.
    pub value: f64,
    pub argmax: usize,
    pub horizon: usize,
    /// First power whose norm exceeded `DIVERGENCE_NORM`, if any.
    pub diverged_at: Option<usize>,
}

/// Scans `‖Tⁿ‖` for `0 ≤ n ≤ n_max` by repeated multiplication.
pub fn power_bound(t: &Operator, n_max: usize) -> Result<PowerBound> {
    if n_max < 1 {
        return Err(OplabError::Precondition("n_max must be at least 1".into()));
    }
    let n = t.dim();
    let mut best = PowerBound { value: if n == 0 { 0.0 } else { 1.0 }, argmax: 0, horizon: n_max, diverged_at: None };
    let mut p = linalg::identity(n);
    for k in 1..=n_max {
        p = &p * t.matrix();
        let v = linalg::spectral_norm(&p);
        if !(v <= DIVERGENCE_NORM) {
            best.diverged_at = Some(k);
            best.value = v;
            best.argmax = k;
            return Ok(best);
        }
        if v > best.value {
            best.value = v;
            best.argmax = k;
        }
    }
    Ok(best)
}

/// Boundary grid size used for `sup |p|` of a degree-`d` polynomial.
pub fn boundary_points(degree: usize) -> usize {
    (512 * degree).max(2048)
}

/// Upper bound for `max_{|z|=1} |p(z)|` from `K` equispaced samples. By
/// Bernstein's inequality `‖p‖∞ ≤ grid_max / (1 − π d / K)`.
pub fn sup_upper_bound(coeffs: &[Complex64]) -> f64 {
    let d = coeffs.iter().rposition(|c| *c != ZERO).unwrap_or(0);
    if d == 0 {
        return coeffs.first().map_or(0.0, |c| c.norm());
    }
    let k = boundary_points(d);
    let grid_max = (0..k)
        .map(|j| {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / k as f64);
            crate::scalar_fn::poly::eval(coeffs, z).norm()
        })
        .fold(0.0, f64::max);
    grid_max / (1.0 - std::f64::consts::PI * d as f64 / k as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyBound {
    /// Lower estimate of the polynomial bound `M`.
    pub value: f64,
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub best: Vec<Complex64>,
    pub evaluations: usize,
}

/// Sweeps over the candidates are followed by this many step-halving rounds
/// of coordinate ascent.
pub const ASCENT_ROUNDS: usize = 2;

/// Candidate polynomials: the constant 1, monomials, the analytic Fejér
/// kernel, a lacunary sum, and `trials` Gaussian random coefficient vectors.
pub fn candidate_polynomials(degree: usize, trials: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut out = Vec::new();
    out.push(vec![ONE]);
    for k in 1..=degree {
        let mut m = vec![ZERO; k + 1];
        m[k] = ONE;
        out.push(m);
    }
    out.push((0..=degree).map(|k| Complex64::new(1.0 - k as f64 / (degree + 1) as f64, 0.0)).collect());
    let mut lac = vec![ZERO; degree + 1];
    let mut j = 1;
    while j <= degree {
        lac[j] = ONE;
        j *= 2;
    }
    lac[0] = ONE;
    out.push(lac);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        out.push(
            (0..=degree)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect(),
        );
    }
    out
}

/// Lower estimate of the polynomial bound given a routine for `‖p(T)‖`.
/// Each candidate is improved by coordinate ascent on the ratio
/// `‖p(T)‖ / sup|p|`.
pub fn poly_bound_lower_with<F>(norm_of_poly: F, degree: usize, trials: usize, seed: u64, rounds: usize) -> Result<PolyBound>
where
    F: Fn(&[Complex64]) -> f64,
{
    if degree < 1 || trials < 1 {
        return Err(OplabError::Precondition("degree and trials must be at least 1".into()));
    }
    let mut evaluations = 0;
    let mut ratio = |p: &[Complex64]| -> f64 {
        evaluations += 1;
        let s = sup_upper_bound(p);
        if s == 0.0 {
            0.0
        } else {
            norm_of_poly(p) / s
        }
    };
    let mut best_value = 0.0;
    let mut best = vec![ONE];
    let dirs = [ONE, -ONE, Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
    for cand in candidate_polynomials(degree, trials, seed) {
        let mut p = cand;
        p.resize(degree + 1, ZERO);
        let mut current = ratio(&p);
        let mut step = 0.5 * p.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for _ in 0..rounds {
            for k in 0..=degree {
                for d in dirs {
                    let old = p[k];
                    p[k] = old + d * step;
                    let r = ratio(&p);
                    if r > current {
                        current = r;
                    } else {
                        p[k] = old;
                    }
                }
            }
            step *= 0.5;
        }
        if current > best_value {
            best_value = current;
            best = p;
        }
    }
    Ok(PolyBound { value: best_value, best, evaluations })
}

/// Dense version: `p(T)` is assembled from precomputed powers of `T`.
pub fn poly_bound_lower(t: &Operator, degree: usize, trials: usize, seed: u64) -> Result<PolyBound> {
    let n = t.dim();
    let mut powers = vec![linalg::identity(n)];
    for k in 1..=degree {
        let next = &powers[k - 1] * t.matrix();
        powers.push(next);
    }
    poly_bound_lower_with(
        |p| {
            let mut m = CMat::zeros(n, n);
            for (c, pw) in p.iter().zip(&powers) {
                if *c != ZERO {
                    m += pw * *c;
                }
            }
            linalg::spectral_norm(&m)
        },
        degree,
        trials,
        seed,
        ASCENT_ROUNDS,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TadmorRitt {
    /// `max |z − 1| ‖(T − z)⁻¹‖` over the evaluated grid.
    pub value: f64,
    #[serde(with = "crate::serde_ext::complex")]
    pub argmax: Complex64,
    pub evaluated: usize,
    /// Grid points skipped because they sit on the spectrum.
    pub skipped: usize,
}

pub fn default_tr_radii() -> Vec<f64> {
    (1..=6).map(|k| 1.0 + 10f64.powi(-k)).collect()
}

pub const DEFAULT_TR_ANGLES: usize = 1024;
/// Up to this dimension resolvent norms come from an SVD per grid point.
pub const TR_SVD_MAX_DIM: usize = 32;
const SPECTRUM_PROXIMITY: f64 = 1e-14;

/// Solves `(S − z) x = b` for upper-triangular `S`; `pivots[j] = S_jj − z`
/// replaces the diagonal.
pub(crate) fn upper_solve_shifted(s: &CMat, pivots: &[Complex64], b: &CVec) -> CVec {
    let n = pivots.len();
    let mut x = b.clone();
    for j in (0..n).rev() {
        let xj = x[j] / pivots[j];
        x[j] = xj;
        let col = s.column(j);
        for i in 0..j {
            x[i] -= col[i] * xj;
        }
    }
    x
}

/// Solves `(S − z)* x = b` with the same conventions.
pub(crate) fn upper_adjoint_solve_shifted(s: &CMat, pivots: &[Complex64], b: &CVec) -> CVec {
    let n = pivots.len();
    let mut x = b.clone();
    for i in 0..n {
        let col = s.column(i);
        let mut acc = x[i];
        for j in 0..i {
            acc -= col[j].conj() * x[j];
        }
        x[i] = acc / pivots[i].conj();
    }
    x
}

/// `‖(S − z)⁻¹‖` for triangular `S` by power iteration, warm-started.
pub(crate) fn triangular_resolvent_norm(s: &CMat, pivots: &[Complex64], warm: CVec) -> (f64, CVec) {
    linalg::power_norm_from(
        warm,
        |x| upper_solve_shifted(s, pivots, x),
        |y| upper_adjoint_solve_shifted(s, pivots, y),
        1e-10,
        500,
    )
}

/// Tadmor–Ritt constant on the grid `z = r e^{it}`, `r ∈ radii`, `angles`
/// equispaced angles.
pub fn tadmor_ritt(t: &Operator, radii: &[f64], angles: usize) -> Result<TadmorRitt> {
    if radii.iter().any(|&r| !(r > 1.0)) || radii.is_empty() || angles == 0 {
        return Err(OplabError::Precondition("radii must be > 1 and angles positive".into()));
    }
    let n = t.dim();
    let (_, s) = linalg::schur(t.matrix())?;
    let diag: Vec<Complex64> = s.diagonal().iter().copied().collect();
    let mut out = TadmorRitt { value: 0.0, argmax: ZERO, evaluated: 0, skipped: 0 };
    let mut warm = linalg::start_vector(n);
    for &r in radii {
        for a in 0..angles {
            let z = Complex64::from_polar(r, std::f64::consts::TAU * a as f64 / angles as f64);
            let pivots: Vec<Complex64> = diag.iter().map(|&d| d - z).collect();
            if pivots.iter().any(|p| p.norm() < SPECTRUM_PROXIMITY) {
                out.skipped += 1;
                continue;
            }
            let norm = if n == 0 {
                0.0
            } else if n <= TR_SVD_MAX_DIM {
                let mut m = s.clone();
                for i in 0..n {
                    m[(i, i)] = pivots[i];
                }
                1.0 / linalg::min_singular_value(&m)
            } else {
                let (v, x) = triangular_resolvent_norm(&s, &pivots, warm.clone());
                warm = x;
                v
            };
            out.evaluated += 1;
            let value = (z - ONE).norm() * norm;
            if value > out.value {
                out.value = value;
                out.argmax = z;
            }
        }
    }
    Ok(out)
}

pub fn tadmor_ritt_default(t: &Operator) -> Result<TadmorRitt> {
    tadmor_ritt(t, &default_tr_radii(), DEFAULT_TR_ANGLES)
}

/// The three boundedness constants together.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub power_bound: f64,
    pub poly_bound_lower: f64,
    pub tadmor_ritt: f64,
    pub horizon: usize,
}

impl BoundReport {
    pub fn compute(t: &Operator, horizon: usize, degree: usize, trials: usize, seed: u64) -> Result<Self> {
        Ok(BoundReport {
            power_bound: power_bound(t, horizon)?.value,
            poly_bound_lower: poly_bound_lower(t, degree, trials, seed)?.value,
            tadmor_ritt: tadmor_ritt_default(t)?.value,
            horizon,
        })
    }
}
