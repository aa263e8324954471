//! Hardy-space inner products by the boundary trapezoid rule.
//!
//! For functions analytic on a neighbourhood of the closed disk the uniform
//! rule converges geometrically, so the quadrature is doubled until two
//! consecutive levels agree to `STABLE_TOL`.

use num_complex::Complex64;

use super::rational::RationalFunction;
use crate::error::{OplabError, Result};

pub const DEFAULT_QUAD_POINTS: usize = 4096;
pub const MAX_QUAD_POINTS: usize = 1 << 20;
pub const STABLE_TOL: f64 = 1e-10;
pub const DIVERGENCE_TOL: f64 = 1e-8;
pub const QUAD_ENV: &str = "OPLAB_QUAD_POINTS";

/// Quadrature default, overridable through `OPLAB_QUAD_POINTS`. The value is
/// not validated here; `h2_inner` rejects anything that is not a power of
/// two of at least 256.
pub fn default_quadrature_points() -> usize {
    match std::env::var(QUAD_ENV) {
        Ok(v) => v.trim().parse().unwrap_or(0),
        Err(_) => DEFAULT_QUAD_POINTS,
    }
}

fn validate_points(points: usize) -> Result<()> {
    if points < 256 || !points.is_power_of_two() {
        return Err(OplabError::Precondition(format!(
            "quadrature_points must be a power of two >= 256, got {points}"
        )));
    }
    Ok(())
}

/// Result of an adaptive boundary quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub points: usize,
    pub last_change: f64,
}

fn node(k: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)
}

/// Adaptive trapezoid rule for a family of boundary functions at once.
/// `sample(z)` returns the values of every function at `z`; the result is
/// the Gram matrix `G[i][j] = ⟨f_j, f_i⟩ = mean f_j conj(f_i)`.
fn gram_adaptive<F>(count: usize, start: usize, sample: F) -> Result<Quadrature<Vec<Vec<Complex64>>>>
where
    F: Fn(Complex64) -> Vec<Complex64>,
{
    validate_points(start)?;
    let accumulate = |sums: &mut Vec<Vec<Complex64>>, vals: &[Complex64]| {
        for i in 0..count {
            for j in 0..count {
                sums[i][j] += vals[j] * vals[i].conj();
            }
        }
    };
    let mut sums = vec![vec![Complex64::new(0.0, 0.0); count]; count];
    for k in 0..start {
        accumulate(&mut sums, &sample(node(k, start)));
    }
    let mut n = start;
    let mean = |sums: &Vec<Vec<Complex64>>, n: usize| -> Vec<Vec<Complex64>> {
        sums.iter().map(|r| r.iter().map(|v| v / n as f64).collect()).collect()
    };
    let mut current = mean(&sums, n);
    loop {
        if n >= MAX_QUAD_POINTS {
            // doubling is exhausted; report the last observed change
            return Err(OplabError::NoConvergence(format!(
                "boundary quadrature did not stabilise at {n} points"
            )));
        }
        let m = 2 * n;
        for k in (1..m).step_by(2) {
            accumulate(&mut sums, &sample(node(k, m)));
        }
        let next = mean(&sums, m);
        let change = current
            .iter()
            .flatten()
            .zip(next.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = next.iter().flatten().map(|v| v.norm()).fold(1.0, f64::max);
        n = m;
        current = next;
        if change < STABLE_TOL * scale {
            return Ok(Quadrature { value: current, points: n, last_change: change });
        }
        if n >= MAX_QUAD_POINTS {
            if change <= DIVERGENCE_TOL * scale {
                return Ok(Quadrature { value: current, points: n, last_change: change });
            }
            return Err(OplabError::NoConvergence(format!(
                "doubling to {n} points still changes the inner product by {change:.3e}"
            )));
        }
    }
}

/// `(1/2π)∫ f(e^{it}) conj(g(e^{it})) dt` with adaptive doubling from
/// `quadrature_points`.
pub fn h2_inner_report(f: &RationalFunction, g: &RationalFunction, quadrature_points: usize) -> Result<Quadrature<Complex64>> {
    let q = gram_adaptive(2, quadrature_points, |z| vec![g.eval(z), f.eval(z)])?;
    // with sample order (g, f): entry [0][1] = mean f conj(g)
    Ok(Quadrature { value: q.value[0][1], points: q.points, last_change: q.last_change })
}

pub fn h2_inner(f: &RationalFunction, g: &RationalFunction, quadrature_points: usize) -> Result<Complex64> {
    h2_inner_report(f, g, quadrature_points).map(|q| q.value)
}

/// Gram matrix `G[i][j] = ⟨f_j, f_i⟩` of a family, so that `G = K*K` when the
/// functions are the columns of `K`.
pub fn h2_gram(fs: &[RationalFunction], quadrature_points: usize) -> Result<Quadrature<Vec<Vec<Complex64>>>> {
    gram_adaptive(fs.len(), quadrature_points, |z| fs.iter().map(|f| f.eval(z)).collect())
}

/// As `h2_gram`, for boundary functions given only through a sampler that
/// returns all `count` values at a point of the circle.
pub fn h2_gram_sampled<F>(count: usize, quadrature_points: usize, sample: F) -> Result<Quadrature<Vec<Vec<Complex64>>>>
where
    F: Fn(Complex64) -> Vec<Complex64>,
{
    gram_adaptive(count, quadrature_points, sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_fn::DiskPoint;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constants_and_monomials() {
        let one = RationalFunction::constant(c(1.0));
        let z = RationalFunction::identity();
        assert!((h2_inner(&one, &one, 4096).unwrap() - c(1.0)).norm() < 1e-14);
        assert!(h2_inner(&one, &z, 4096).unwrap().norm() < 1e-14);
    }

    #[test]
    fn cauchy_kernel_norm() {
        // ‖1/(1 − z/2)‖² = Σ 4^{-k} = 4/3
        let k = RationalFunction::cauchy_kernel(DiskPoint::real(0.5).unwrap());
        let v = h2_inner(&k, &k, 4096).unwrap();
        assert!((v - c(4.0 / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn doubling_is_stable() {
        let f = RationalFunction::cauchy_kernel(DiskPoint::new(Complex64::new(0.6, 0.3)).unwrap());
        let g = RationalFunction::blaschke_factor(DiskPoint::real(-0.7).unwrap());
        let a = h2_inner(&f, &g, 4096).unwrap();
        let b = h2_inner(&f, &g, 8192).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn invalid_point_counts() {
        let one = RationalFunction::constant(c(1.0));
        assert!(h2_inner(&one, &one, 100).is_err());
        assert!(h2_inner(&one, &one, 128).is_err());
        assert!(h2_inner(&one, &one, 300).is_err());
    }

    #[test]
    fn near_boundary_pole_needs_more_points() {
        let k = RationalFunction::cauchy_kernel(DiskPoint::real(0.999).unwrap());
        let q = h2_inner_report(&k, &k, 256).unwrap();
        assert!(q.points > 256);
        let exact = 1.0 / (1.0 - 0.999f64 * 0.999);
        assert!((q.value.re - exact).abs() < 1e-8 * exact);
    }
}
