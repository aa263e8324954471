//! Finite Nevanlinna–Pick interpolation.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{OplabError, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::scalar_fn::{poly, DiskPoint, RationalFunction};

/// Smallest eigenvalue treated as nonnegative.
pub const PSD_TOL: f64 = -1e-10;
/// Relative width at which the norm bisection stops.
pub const BISECTION_REL_TOL: f64 = 1e-10;
/// The interpolant is built at `norm · (1 + margin)` for the first margin
/// whose Schur parameters all stay strictly inside the disk. Near-singular
/// Pick matrices need more than the first one because the bisection accepts
/// eigenvalues down to `PSD_TOL`.
pub const CONSTRUCTION_MARGINS: [f64; 3] = [1e-8, 1e-7, 5e-7];
pub const MAX_SCALE: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PickData {
    pub nodes: Vec<DiskPoint>,
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub targets: Vec<Complex64>,
    #[serde(with = "crate::serde_ext::matrix")]
    pub matrix: CMat,
}

impl PickData {
    pub fn new(nodes: Vec<DiskPoint>, targets: Vec<Complex64>) -> Result<Self> {
        if nodes.len() != targets.len() {
            return Err(OplabError::Dimension(format!(
                "{} nodes but {} targets",
                nodes.len(),
                targets.len()
            )));
        }
        if nodes.is_empty() {
            return Err(OplabError::Precondition("interpolation needs at least one node".into()));
        }
        for (i, a) in nodes.iter().enumerate() {
            if nodes[..i].contains(a) {
                return Err(OplabError::Invariant(format!("repeated node {}", a.value())));
            }
        }
        if let Some(t) = targets.iter().find(|t| !(t.re.is_finite() && t.im.is_finite())) {
            return Err(OplabError::Invariant(format!("non-finite target {t}")));
        }
        let matrix = pick_matrix(&nodes, &targets, 1.0);
        Ok(PickData { nodes, targets, matrix })
    }
}

/// `P_ij = (1 − s μ_i conj(μ_j)) / (1 − λ_i conj(λ_j))`; `s = 1` is the
/// Pick matrix proper and `s = 1/t²` that of the targets scaled by `1/t`.
pub fn pick_matrix(nodes: &[DiskPoint], targets: &[Complex64], s: f64) -> CMat {
    let n = nodes.len();
    CMat::from_fn(n, n, |i, j| {
        let (li, lj) = (nodes[i].value(), nodes[j].value());
        (ONE - targets[i] * targets[j].conj() * s) / (ONE - li * lj.conj())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PickReport {
    pub feasible: bool,
    pub min_eigenvalue: f64,
}

pub fn pick_feasible(data: &PickData) -> PickReport {
    report(&data.matrix)
}

fn report(m: &CMat) -> PickReport {
    let min_eigenvalue = linalg::min_hermitian_eigenvalue(m);
    PickReport { feasible: min_eigenvalue >= PSD_TOL, min_eigenvalue }
}

/// With `K = LL*` the kernel part of the Pick matrix and `D = diag(μ)`, the
/// Pick matrix at scale `t` is `K − DKD*/t²`, congruent to `I − BB*/t²` for
/// `B = L⁻¹DL`. Clustered nodes make `K` nearly singular, and then an absolute
/// eigenvalue tolerance on the raw matrix accepts scales well below the
/// minimal norm; on the whitened form it is a relative tolerance on `t²`.
fn whitened_targets(data: &PickData) -> Option<CMat> {
    let kernel = pick_matrix(&data.nodes, &data.targets, 0.0);
    let l = linalg::cholesky(&kernel).ok()?;
    let b = l.solve_lower_triangular(&(linalg::diag(&data.targets) * &l))?;
    linalg::is_finite(&b).then_some(b)
}

fn feasible_at(data: &PickData, whitened: Option<&CMat>, t: f64) -> bool {
    match whitened {
        Some(b) => {
            let n = b.nrows();
            let m = linalg::identity(n) - b * b.adjoint() * Complex64::new(1.0 / (t * t), 0.0);
            report(&linalg::hermitian_part(&m)).feasible
        }
        None => report(&pick_matrix(&data.nodes, &data.targets, 1.0 / (t * t))).feasible,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interpolant {
    pub phi: RationalFunction,
    /// Smallest scale found feasible by bisection.
    pub norm: f64,
    /// Largest scale found infeasible (0 when the targets vanish).
    pub lower: f64,
    pub residual: f64,
    /// Relative margin above `norm` at which `phi` was built.
    pub margin: f64,
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub schur_parameters: Vec<Complex64>,
}

/// Minimal-norm interpolation `φ(λ_n) = μ_n`: bisection on the scale `t` with
/// `pick_feasible(targets / t)`, then the Schur–Nevanlinna algorithm at the
/// feasible scale.
pub fn np_interpolate(nodes: &[DiskPoint], targets: &[Complex64]) -> Result<Interpolant> {
    let data = PickData::new(nodes.to_vec(), targets.to_vec())?;
    let largest = targets.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if largest == 0.0 {
        return Ok(Interpolant {
            phi: RationalFunction::zero(),
            norm: 0.0,
            lower: 0.0,
            residual: 0.0,
            margin: 0.0,
            schur_parameters: vec![ZERO; nodes.len()],
        });
    }
    let (lower, norm) = minimal_norm(&data, largest)?;
    let mut attempt = Err(OplabError::Infeasible("no construction margin tried".into()));
    for margin in CONSTRUCTION_MARGINS {
        let scale = norm * (1.0 + margin);
        let scaled: Vec<Complex64> = targets.iter().map(|t| t / scale).collect();
        attempt = schur_nevanlinna(nodes, &scaled).map(|(f, g)| (f.scale(Complex64::new(scale, 0.0)), g, margin));
        if attempt.is_ok() {
            break;
        }
    }
    let (phi, gammas, margin) = attempt?;
    let residual = nodes
        .iter()
        .zip(targets)
        .map(|(z, t)| (phi.eval(z.value()) - t).norm())
        .fold(0.0, f64::max);
    Ok(Interpolant { phi, norm, lower, residual, margin, schur_parameters: gammas })
}

/// Brackets the minimal norm: returns `(infeasible, feasible)` scales with
/// relative width at most `BISECTION_REL_TOL`.
pub fn minimal_norm(data: &PickData, largest: f64) -> Result<(f64, f64)> {
    // |μ_n| ≤ ‖φ‖ is necessary, so scales below max|μ| are infeasible
    let whitened = whitened_targets(data);
    let feasible_at = |t: f64| feasible_at(data, whitened.as_ref(), t);
    let mut lo = largest * (1.0 - 1e-12);
    let mut hi = largest;
    while !feasible_at(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_SCALE {
            return Err(OplabError::Infeasible(format!(
                "no feasible interpolation norm below {MAX_SCALE:e}"
            )));
        }
    }
    if feasible_at(lo) {
        return Ok((lo, lo));
    }
    while hi - lo > BISECTION_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if feasible_at(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Schur–Nevanlinna recursion for data `f(z_k) = w_k` with `|w_k| < 1`,
/// terminated by `f_{n+1} = 0`. Returns `f` and the Schur parameters.
pub fn schur_nevanlinna(nodes: &[DiskPoint], values: &[Complex64]) -> Result<(RationalFunction, Vec<Complex64>)> {
    let n = nodes.len();
    let z: Vec<Complex64> = nodes.iter().map(DiskPoint::value).collect();
    let mut w = values.to_vec();
    let mut gammas = Vec::with_capacity(n);
    for k in 0..n {
        let g = w[k];
        if g.norm() >= 1.0 {
            return Err(OplabError::Infeasible(format!(
                "Schur parameter {k} has modulus {:.3e} >= 1",
                g.norm()
            )));
        }
        gammas.push(g);
        for j in (k + 1)..n {
            let b = (z[j] - z[k]) / (ONE - z[k].conj() * z[j]);
            w[j] = (w[j] - g) / ((ONE - g.conj() * w[j]) * b);
        }
    }
    // unwind f_k = (γ_k q (1 − z̄_k z) + (z − z_k) p) / (q (1 − z̄_k z) + γ̄_k (z − z_k) p)
    let mut p: Vec<Complex64> = Vec::new();
    let mut q: Vec<Complex64> = vec![ONE];
    for k in (0..n).rev() {
        let g = gammas[k];
        let blaschke_den = [ONE, -z[k].conj()];
        let shift = [-z[k], ONE];
        let q_den = poly::mul(&q, &blaschke_den);
        let p_shift = poly::mul(&p, &shift);
        let new_p = poly::add(&poly::scale(&q_den, g), &p_shift);
        let new_q = poly::add(&q_den, &poly::scale(&p_shift, g.conj()));
        let s = new_q.iter().chain(new_p.iter()).map(|c| c.norm()).fold(0.0, f64::max);
        let inv = Complex64::new(1.0 / s, 0.0);
        p = poly::scale(&new_p, inv);
        q = poly::scale(&new_q, inv);
    }
    let f = RationalFunction::from_coefficients_uncancelled(p, q)?;
    Ok((f, gammas))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp(x: f64) -> DiskPoint {
        DiskPoint::real(x).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Values of a degree-2 Blaschke product at six nodes: the Pick matrix is
    /// singular at the minimal norm 1, the hardest case for the construction.
    #[test]
    fn extremal_data_from_low_degree_product() {
        let b = crate::scalar_fn::BlaschkeProduct::from_complex(&[Complex64::new(0.3, 0.2), c(-0.5)]).unwrap();
        let zs = [c(0.1), Complex64::new(0.0, 0.6), c(-0.7), Complex64::new(0.4, -0.4), c(0.8), Complex64::new(-0.2, -0.5)];
        let nodes: Vec<DiskPoint> = zs.iter().map(|&z| DiskPoint::new(z).unwrap()).collect();
        let targets: Vec<Complex64> = zs.iter().map(|&z| b.eval(z).unwrap()).collect();
        let f = np_interpolate(&nodes, &targets).unwrap();
        assert!((f.norm - 1.0).abs() < 1e-6, "{}", f.norm);
        assert!(f.residual < 1e-8, "{:e}", f.residual);
        assert!(f.phi.boundary_max(4096) <= f.norm * (1.0 + 1e-6));
        assert!(CONSTRUCTION_MARGINS.contains(&f.margin));
    }

    #[test]
    fn clustered_nodes_with_two_zero_targets() {
        // φ vanishes at 0 and a, so φ = z b_a ψ and the minimal norm is
        // |w| / |z b_a(z)| at the third node
        let a = 0.06897109685856824;
        let z3 = Complex64::new(-0.029797776699245028, -0.08469536483198856);
        let w3 = c(0.2874094446579569);
        let nodes = [dp(0.0), dp(a), DiskPoint::new(z3).unwrap()];
        let f = np_interpolate(&nodes, &[c(0.0), c(0.0), w3]).unwrap();
        let expected = w3.norm() / (z3 * (c(a) - z3) / (c(1.0) - c(a) * z3)).norm();
        assert!((f.norm - expected).abs() < 1e-6 * expected, "{} vs {expected}", f.norm);
        assert!(f.residual < 1e-8 * expected, "{:e}", f.residual);
        assert!(f.phi.boundary_max(4096) <= f.norm * (1.0 + 1e-6));
    }

    #[test]
    fn one_by_one_cases() {
        let d = PickData::new(vec![dp(0.0)], vec![c(0.0)]).unwrap();
        let r = pick_feasible(&d);
        assert!(r.feasible);
        assert_eq!(d.matrix[(0, 0)], c(1.0));
        let d = PickData::new(vec![dp(0.0)], vec![c(1.2)]).unwrap();
        assert!(!pick_feasible(&d).feasible);
        let d = PickData::new(vec![dp(0.0)], vec![Complex64::new(0.6, 0.8)]).unwrap();
        assert!(pick_feasible(&d).feasible);
    }

    #[test]
    fn two_by_two_eigenvalue_oracle() {
        // nodes {0, 0.5}, targets {0, 0.9}: P = [[1, 1], [1, (1 − 0.81)/0.75]]
        let d = PickData::new(vec![dp(0.0), dp(0.5)], vec![c(0.0), c(0.9)]).unwrap();
        let (a, b, cc): (f64, f64, f64) = (1.0, 1.0, 0.19 / 0.75);
        let min_eig = 0.5 * (a + cc) - (0.25 * (a - cc) * (a - cc) + b * b).sqrt();
        let r = pick_feasible(&d);
        assert!((r.min_eigenvalue - min_eig).abs() < 1e-14);
        assert!(!r.feasible);
    }

    #[test]
    fn constant_interpolants() {
        let it = np_interpolate(&[dp(0.0)], &[c(0.5)]).unwrap();
        assert!((it.norm - 0.5).abs() < 1e-9);
        assert!((it.phi.eval(c(0.3)) - c(0.5)).norm() < 1e-8);
        let v = Complex64::new(0.3, -0.2);
        let it = np_interpolate(&[dp(0.1), dp(-0.4), DiskPoint::new(Complex64::new(0.2, 0.5)).unwrap()], &[v, v, v]).unwrap();
        assert!((it.norm - v.norm()).abs() < 1e-9 * v.norm());
        assert!(it.residual < 1e-12);
        assert!((it.phi.boundary_max(512) - v.norm()).abs() < 1e-8);
    }

    #[test]
    fn two_node_minimal_norm() {
        // nodes {0, 0.5}, targets {0, 0.25}: φ(z) = z/2 has norm 1/2 and is
        // the minimal interpolant (Schwarz lemma)
        let it = np_interpolate(&[dp(0.0), dp(0.5)], &[c(0.0), c(0.25)]).unwrap();
        assert!((it.norm - 0.5).abs() < 1e-9);
        assert!(it.residual < 1e-8);
        assert!(it.phi.boundary_max(4096) <= it.norm * (1.0 + 1e-6));
    }

    #[test]
    fn scaling_targets_scales_norm() {
        let nodes = [dp(0.1), DiskPoint::new(Complex64::new(-0.3, 0.4)).unwrap(), dp(0.7)];
        let targets = [c(0.2), Complex64::new(0.5, -0.1), c(-0.4)];
        let base = np_interpolate(&nodes, &targets).unwrap();
        for t in [0.25, 0.5, 0.9] {
            let scaled: Vec<Complex64> = targets.iter().map(|x| x * t).collect();
            let it = np_interpolate(&nodes, &scaled).unwrap();
            assert!((it.norm - t * base.norm).abs() < 1e-6 * base.norm);
        }
    }

    #[test]
    fn infeasible_when_unbounded() {
        // nearly coincident nodes with very different targets need a huge norm
        let nodes = [dp(0.0), DiskPoint::real(1e-9).unwrap()];
        assert!(matches!(
            np_interpolate(&nodes, &[c(0.0), c(10.0)]),
            Err(OplabError::Infeasible(_))
        ));
    }
}
