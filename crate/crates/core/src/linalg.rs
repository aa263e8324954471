//! Dense complex linear-algebra helpers shared by the operator pipelines.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{OplabError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Above this dimension spectral norms switch from SVD to power iteration.
pub const SVD_MAX_DIM: usize = 512;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn diag(values: &[Complex64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(values))
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `(U, σ, V*)` from nalgebra, through the real routine for real-valued
/// input, and the max-entry residual of `U diag(σ) V* − M`.
fn raw_svd(m: &CMat) -> (CMat, Vec<f64>, CMat, f64) {
    let (u, sv, vt): (CMat, Vec<f64>, CMat) = if m.iter().all(|z| z.im == 0.0) {
        let svd = m.map(|z| z.re).svd(true, true);
        (svd.u.unwrap().map(c), svd.singular_values.iter().copied().collect(), svd.v_t.unwrap().map(c))
    } else {
        let svd = m.clone().svd(true, true);
        (svd.u.unwrap(), svd.singular_values.iter().copied().collect(), svd.v_t.unwrap())
    };
    let mut us = u.clone();
    for (k, &x) in sv.iter().enumerate() {
        us.column_mut(k).scale_mut(x);
    }
    let residual = max_abs_diff(&(us * &vt), m);
    (u, sv, vt, residual)
}

/// nalgebra's SVD occasionally fails to converge to the right answer on
/// graded bidiagonal input (it is then off in the 7th digit). Each result is
/// checked by recomposition, and a failed one is retried on the transpose.
fn checked_svd(m: &CMat) -> (CMat, Vec<f64>, CMat, bool) {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-13 * scale * (m.nrows().max(m.ncols()) as f64).sqrt().max(1.0);
    let (u, sv, vt, r) = raw_svd(m);
    if r <= tol {
        return (u, sv, vt, true);
    }
    let (ut, svt, vtt, rt) = raw_svd(&m.transpose());
    if rt < r {
        // Mᵀ = U' Σ V'*  gives  M = conj(V') Σ U'ᵀ
        (vtt.transpose(), svt, ut.transpose(), rt <= tol)
    } else {
        (u, sv, vt, false)
    }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let (_, mut s, _, ok) = checked_svd(m);
    if !ok {
        // eigenvalues of [[0, M], [M*, 0]] are ±σ
        let (r, k) = (m.nrows(), m.ncols());
        let mut jw = CMat::zeros(r + k, r + k);
        jw.view_mut((0, r), (r, k)).copy_from(m);
        jw.view_mut((r, 0), (k, r)).copy_from(&m.adjoint());
        let mut e: Vec<f64> = jw.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| b.total_cmp(a));
        s = e.into_iter().take(r.min(k)).map(|x| x.max(0.0)).collect();
    }
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value; SVD up to `SVD_MAX_DIM`, power iteration beyond.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows().max(m.ncols()) <= SVD_MAX_DIM {
        return singular_values(m)[0];
    }
    let a = m.clone();
    let ah = m.adjoint();
    power_norm(m.ncols(), |x| &a * x, |y| &ah * y, 1e-10, 2000)
}

pub fn min_singular_value(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Deterministic, non-degenerate starting vector for power iterations.
pub fn start_vector(n: usize) -> CVec {
    CVec::from_fn(n, |i, _| Complex64::new(1.0 + 0.37 * ((i * 7919 % 101) as f64 / 101.0), 0.13 * ((i % 17) as f64)))
}

/// `‖M‖` by power iteration on `M*M`, given the two matrix-vector products.
/// Stops when consecutive estimates agree to `rel_tol`.
pub fn power_norm<F, G>(n: usize, apply: F, apply_adjoint: G, rel_tol: f64, max_iter: usize) -> f64
where
    F: Fn(&CVec) -> CVec,
    G: Fn(&CVec) -> CVec,
{
    power_norm_from(start_vector(n), apply, apply_adjoint, rel_tol, max_iter).0
}

/// As `power_norm`, from a given start; also returns the final right vector
/// so that sweeps over nearby operators can warm-start.
pub fn power_norm_from<F, G>(start: CVec, apply: F, apply_adjoint: G, rel_tol: f64, max_iter: usize) -> (f64, CVec)
where
    F: Fn(&CVec) -> CVec,
    G: Fn(&CVec) -> CVec,
{
    let mut x = start;
    let nx = x.norm();
    if nx == 0.0 || x.is_empty() {
        return (0.0, x);
    }
    x /= c(nx);
    let mut est = 0.0;
    for _ in 0..max_iter {
        let y = apply(&x);
        let ny = y.norm();
        if ny == 0.0 || !ny.is_finite() {
            return (ny, x);
        }
        let z = apply_adjoint(&y);
        let nz = z.norm();
        if nz == 0.0 {
            return (ny, x);
        }
        // ‖Mx‖ is a monotone lower bound for ‖M‖ along the iteration
        let prev = est;
        est = f64::max(est, ny);
        x = z / c(nz);
        if (est - prev).abs() <= rel_tol * est {
            break;
        }
    }
    (est, x)
}

/// Two passes of classical Gram–Schmidt against orthonormal `basis`.
fn reorthogonalize(x: &mut CVec, basis: &[CVec]) {
    for _ in 0..2 {
        for q in basis {
            let h = q.dotc(x);
            x.axpy(-h, q, ONE);
        }
    }
}

/// `‖M‖` by Golub–Kahan–Lanczos bidiagonalization with full
/// reorthogonalization, restarted from the top Ritz vector every `block`
/// steps. Returns the estimate and the right Ritz vector. The estimate is the
/// largest singular value of a compression of `M`, hence a lower bound.
pub fn krylov_norm_from<F, G>(start: CVec, apply: F, apply_adjoint: G, rel_tol: f64, block: usize, restarts: usize) -> (f64, CVec)
where
    F: Fn(&CVec) -> CVec,
    G: Fn(&CVec) -> CVec,
{
    let n = start.len();
    let mut v = start;
    if n == 0 || v.norm() == 0.0 {
        return (0.0, v);
    }
    let block = block.clamp(1, n);
    let mut best = 0.0;
    for _ in 0..=restarts {
        v.unscale_mut(v.norm());
        let mut vs: Vec<CVec> = vec![v.clone()];
        let mut us: Vec<CVec> = Vec::new();
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut estimate = 0.0;
        let mut ritz = v.clone();
        let mut converged = false;
        for j in 0..block {
            let mut u = apply(&vs[j]);
            let scale = u.norm().max(alphas.iter().chain(&betas).copied().fold(0.0, f64::max));
            reorthogonalize(&mut u, &us);
            let alpha = u.norm();
            let exhausted = !(alpha > 1e-13 * scale);
            alphas.push(if exhausted { 0.0 } else { alpha });
            if !exhausted {
                u.unscale_mut(alpha);
                us.push(u);
            }
            let k = alphas.len();
            let b = CMat::from_fn(k, k, |r, col| {
                if r == col {
                    c(alphas[r])
                } else if col == r + 1 {
                    c(betas[r])
                } else {
                    ZERO
                }
            });
            let (_, sv, right) = svd_full(&b);
            let smax = sv[0];
            ritz = CVec::zeros(n);
            for (i, q) in vs.iter().take(k).enumerate() {
                ritz.axpy(right[(i, 0)], q, ONE);
            }
            let prev = estimate;
            estimate = smax;
            if exhausted || (j > 0 && (estimate - prev).abs() <= rel_tol * estimate) {
                converged = true;
                break;
            }
            let mut w = apply_adjoint(&us[us.len() - 1]);
            let scale = w.norm().max(estimate);
            reorthogonalize(&mut w, &vs);
            let beta = w.norm();
            if !(beta > 1e-13 * scale) {
                converged = true;
                break;
            }
            betas.push(beta);
            w.unscale_mut(beta);
            vs.push(w);
        }
        let improved = estimate > best * (1.0 + rel_tol);
        best = f64::max(best, estimate);
        v = ritz;
        if converged || !improved {
            break;
        }
    }
    (best, v)
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(OplabError::Dimension(format!(
            "cannot solve {}x{} system with {}x{} right-hand side",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let lu = a.clone().lu();
    let x = lu
        .solve(b)
        .ok_or_else(|| OplabError::Spectral("singular linear system".into()))?;
    if !is_finite(&x) {
        return Err(OplabError::Spectral("linear solve produced non-finite entries".into()));
    }
    Ok(x)
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    solve(a, &identity(a.nrows()))
}

/// Iteration cap for the QR sweeps; nilpotent blocks can stall them.
const SCHUR_MAX_ITER: usize = 4000;

/// Start indices of the finest block-upper-triangular partition that is
/// exact in the stored entries.
fn triangular_blocks(a: &CMat) -> Vec<usize> {
    let n = a.nrows();
    // last_row[j]: largest i with a[(i, j)] != 0
    let last_row: Vec<usize> = (0..n)
        .map(|j| (0..n).rev().find(|&i| a[(i, j)] != ZERO).unwrap_or(0))
        .collect();
    let mut starts = vec![0];
    let mut reach = 0;
    for k in 1..n {
        reach = reach.max(last_row[k - 1]);
        if reach < k {
            starts.push(k);
        }
    }
    starts
}

fn is_lower_triangular(a: &CMat) -> bool {
    (0..a.ncols()).all(|j| (0..j.min(a.nrows())).all(|i| a[(i, j)] == ZERO))
}

/// Eigenvalues from the complex Schur form, after splitting off exact
/// block-triangular structure. A block whose QR iteration does not converge
/// contributes NaN.
pub fn eigenvalues(a: &CMat) -> Vec<Complex64> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    if is_upper_triangular(a) || is_lower_triangular(a) {
        return a.diagonal().iter().copied().collect();
    }
    let mut starts = triangular_blocks(a);
    starts.push(n);
    let mut out = Vec::with_capacity(n);
    for w in starts.windows(2) {
        let (lo, len) = (w[0], w[1] - w[0]);
        let block = a.view((lo, lo), (len, len)).into_owned();
        if len == 1 || is_upper_triangular(&block) || is_lower_triangular(&block) {
            out.extend(block.diagonal().iter().copied());
            continue;
        }
        match block.try_schur(f64::EPSILON, SCHUR_MAX_ITER * len).and_then(|s| s.eigenvalues()) {
            Some(v) => out.extend(v.iter().copied()),
            None => out.extend(std::iter::repeat_n(Complex64::new(f64::NAN, f64::NAN), len)),
        }
    }
    out
}

pub fn spectral_radius(a: &CMat) -> f64 {
    // NaN propagates so that a failed eigensolve never passes a radius check
    eigenvalues(a).iter().map(|z| z.norm()).fold(0.0, |m, r| if m.is_nan() || r.is_nan() { f64::NAN } else { m.max(r) })
}

pub fn is_upper_triangular(a: &CMat) -> bool {
    (0..a.ncols()).all(|j| ((j + 1)..a.nrows()).all(|i| a[(i, j)] == ZERO))
}

/// Unitary `Q` and upper-triangular `S` with `A = Q S Q*`.
pub fn schur(a: &CMat) -> Result<(CMat, CMat)> {
    if is_upper_triangular(a) {
        return Ok((identity(a.nrows()), a.clone()));
    }
    let (q, mut s) = a
        .clone()
        .try_schur(f64::EPSILON, SCHUR_MAX_ITER * a.nrows().max(1))
        .map(|s| s.unpack())
        .ok_or_else(|| OplabError::NoConvergence("Schur iteration did not converge".into()))?;
    for j in 0..s.ncols() {
        for i in (j + 1)..s.nrows() {
            s[(i, j)] = ZERO;
        }
    }
    Ok((q, s))
}

/// Hermitian eigen-decomposition `(values ascending, vectors)`.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let sym = hermitian_part(h);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(h.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn hermitian_part(h: &CMat) -> CMat {
    (h + h.adjoint()) * c(0.5)
}

pub fn min_hermitian_eigenvalue(h: &CMat) -> f64 {
    hermitian_eigen(h).0.first().copied().unwrap_or(f64::INFINITY)
}

/// Square root of a Hermitian positive semidefinite matrix. Eigenvalues in
/// `[clamp, 0)` are treated as roundoff and set to zero; anything below
/// `clamp` is an error.
pub fn hermitian_sqrt(h: &CMat, clamp: f64) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(h);
    if let Some(&v) = vals.first() {
        if v < clamp {
            return Err(OplabError::Invariant(format!(
                "matrix is not positive semidefinite (eigenvalue {v:.3e})"
            )));
        }
    }
    let roots: Vec<Complex64> = vals.iter().map(|&v| c(v.max(0.0).sqrt())).collect();
    Ok(&vecs * diag(&roots) * vecs.adjoint())
}

/// Lower-triangular Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(h: &CMat) -> Result<CMat> {
    hermitian_part(h)
        .cholesky()
        .map(|ch| ch.unpack())
        .ok_or_else(|| OplabError::Degenerate("matrix is not positive definite".into()))
}

/// `‖A‖ ‖A⁻¹‖` from the singular values.
pub fn condition_number(a: &CMat) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    CMat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Polynomial in `T` by Horner's rule, ascending coefficients.
pub fn poly_of_matrix(coeffs: &[Complex64], t: &CMat) -> CMat {
    let n = t.nrows();
    let mut acc = CMat::zeros(n, n);
    for &k in coeffs.iter().rev() {
        acc = &acc * t;
        for i in 0..n {
            acc[(i, i)] += k;
        }
    }
    acc
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Orthonormal basis of the column span; the columns must be independent.
pub fn orthonormal_columns(m: &CMat) -> Result<CMat> {
    if m.ncols() == 0 {
        return Ok(m.clone());
    }
    let s = singular_values(m);
    if m.ncols() > m.nrows() || !(s[s.len() - 1] > 1e-12 * s[0]) {
        return Err(OplabError::NotABasis(format!("{} columns of length {} are dependent", m.ncols(), m.nrows())));
    }
    Ok(m.clone().qr().q())
}

/// Full SVD `(U, σ, V)` with `σ` descending and `A = U diag(σ) V*`.
pub fn svd_full(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (u, sv, vt, _) = checked_svd(m);
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let u = CMat::from_fn(u.nrows(), order.len(), |r, k| u[(r, order[k])]);
    let v = CMat::from_fn(vt.ncols(), order.len(), |r, k| vt[(order[k], r)].conj());
    (u, order.iter().map(|&i| sv[i]).collect(), v)
}

/// Eigenvalues and unit eigenvectors from the Schur form. Fails when a
/// repeated eigenvalue carries a Jordan block (no eigenbasis).
pub fn eigenvectors(a: &CMat) -> Result<(Vec<Complex64>, CMat)> {
    let n = a.nrows();
    let (q, s) = schur(a)?;
    let scale = spectral_norm(a).max(1.0);
    let mut y = CMat::zeros(n, n);
    for j in 0..n {
        let lam = s[(j, j)];
        let mut x = CVec::zeros(n);
        x[j] = ONE;
        for i in (0..j).rev() {
            let mut rhs = ZERO;
            for k in (i + 1)..=j {
                rhs -= s[(i, k)] * x[k];
            }
            let pivot = s[(i, i)] - lam;
            if pivot.norm() <= 1e-12 * scale {
                if rhs.norm() > 1e-10 * scale {
                    return Err(OplabError::NotABasis(format!("eigenvalue {lam} is defective")));
                }
                x[i] = ZERO;
            } else {
                x[i] = rhs / pivot;
            }
        }
        let v = &q * x;
        let nv = v.norm();
        y.set_column(j, &(v / c(nv)));
    }
    Ok((s.diagonal().iter().copied().collect(), y))
}
