//! Dense complex polynomials in ascending-coefficient form.

use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Value and first derivative by a single Horner sweep.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

pub fn scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|&c| c * s).collect()
}

/// Drops trailing coefficients that are exactly zero or negligible relative
/// to the largest coefficient.
pub fn trim(mut a: Vec<Complex64>, rel_tol: f64) -> Vec<Complex64> {
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while let Some(last) = a.last() {
        if last.norm() <= rel_tol * scale || *last == ZERO {
            a.pop();
        } else {
            break;
        }
    }
    a
}

/// Degree of a trimmed polynomial; `None` for the zero polynomial.
pub fn degree(a: &[Complex64]) -> Option<usize> {
    a.iter().rposition(|c| *c != ZERO)
}

/// Monic polynomial with the given roots, ascending coefficients.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    roots
        .iter()
        .fold(vec![ONE], |acc, &r| mul(&acc, &[-r, ONE]))
}

/// `∏ (1 − z/p)` for nonzero `p`.
pub fn from_reciprocal_roots(roots: &[Complex64]) -> Vec<Complex64> {
    roots
        .iter()
        .fold(vec![ONE], |acc, &p| mul(&acc, &[ONE, -ONE / p]))
}

/// Quotient of `a` by `(z − r)`; the remainder is discarded.
pub fn deflate(a: &[Complex64], r: Complex64) -> Vec<Complex64> {
    let n = a.len();
    if n <= 1 {
        return Vec::new();
    }
    let mut q = vec![ZERO; n - 1];
    let mut carry = ZERO;
    for k in (1..n).rev() {
        carry = a[k] + carry * r;
        q[k - 1] = carry;
    }
    q
}

pub fn derivative(a: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Roots by eigenvalues of the companion matrix, polished with two Newton
/// steps on the original coefficients.
pub fn roots(a: &[Complex64]) -> Vec<Complex64> {
    let a = trim(a.to_vec(), 0.0);
    let Some(d) = degree(&a) else {
        return Vec::new();
    };
    if d == 0 {
        return Vec::new();
    }
    // leading zeros of the polynomial (roots at the origin)
    let shift = a.iter().position(|c| *c != ZERO).unwrap_or(0);
    let reduced = &a[shift..=d];
    let m = reduced.len() - 1;
    let mut out = vec![ZERO; shift];
    if m == 0 {
        return out;
    }
    let lead = reduced[m];
    let companion = DMatrix::from_fn(m, m, |i, j| {
        if j == m - 1 {
            -reduced[i] / lead
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    });
    let eig = companion
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular");
    for mut z in eig.iter().copied() {
        for _ in 0..2 {
            let (p, dp) = eval_with_derivative(reduced, z);
            if dp.norm() > 0.0 {
                let step = p / dp;
                if step.norm() < 1e-6 * z.norm().max(1.0) {
                    z -= step;
                }
            }
        }
        out.push(z);
    }
    out
}
