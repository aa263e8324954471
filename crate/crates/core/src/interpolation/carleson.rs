use num_complex::Complex64;
use serde::Serialize;

use crate::error::{OplabError, Result};
use crate::scalar_fn::{pseudohyperbolic, BlaschkeProduct, DiskPoint};

/// `δ = min_n ∏_{k≠n} ρ(λ_k, λ_n)` with the per-index products.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlesonReport {
    pub delta: f64,
    pub argmin: usize,
    pub values: Vec<f64>,
}

impl CarlesonReport {
    fn from_log_values(logs: Vec<f64>) -> Self {
        let values: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        let (argmin, delta) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, v)| if v < best.1 { (k, v) } else { best });
        CarlesonReport { delta: delta.min(1.0), argmin, values }
    }
}

pub fn carleson_delta(zeros: &[DiskPoint]) -> Result<CarlesonReport> {
    if zeros.is_empty() {
        return Err(OplabError::Precondition("carleson_delta needs at least one zero".into()));
    }
    let n = zeros.len();
    let mut logs = vec![0.0; n];
    for i in 0..n {
        for k in (i + 1)..n {
            let rho = pseudohyperbolic(zeros[i], zeros[k]);
            if rho == 0.0 {
                return Err(OplabError::Invariant(format!(
                    "duplicate zero {} at indices {i} and {k}",
                    zeros[i].value()
                )));
            }
            let l = rho.ln();
            logs[i] += l;
            logs[k] += l;
        }
    }
    Ok(CarlesonReport::from_log_values(logs))
}

/// Carleson constant for real zeros `λ_n = 1 − g_n` given through their gaps
/// `g_n ∈ (0, 1]`. Stays exact where `1 − g_n` would round to 1, using
/// `ρ(1−g, 1−h) = |g − h| / (g + h − gh)`.
pub fn carleson_delta_from_gaps(gaps: &[f64]) -> Result<CarlesonReport> {
    if gaps.is_empty() {
        return Err(OplabError::Precondition("carleson_delta needs at least one zero".into()));
    }
    if let Some(g) = gaps.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
        return Err(OplabError::Invariant(format!("gap {g} outside (0, 1]")));
    }
    let n = gaps.len();
    let mut logs = vec![0.0; n];
    for i in 0..n {
        for k in (i + 1)..n {
            let (g, h) = (gaps[i], gaps[k]);
            if g == h {
                return Err(OplabError::Invariant(format!("duplicate zero at indices {i} and {k}")));
            }
            let l = ((g - h).abs() / (g + h - g * h)).ln();
            logs[i] += l;
            logs[k] += l;
        }
    }
    Ok(CarlesonReport::from_log_values(logs))
}

/// Tensor grid of `radii` Chebyshev-spaced radii in `[0, 1 − 1e-4]` times
/// `angles` equally spaced angles.
pub fn disk_grid(radii: usize, angles: usize) -> Vec<Complex64> {
    let rmax = 1.0 - 1e-4;
    let mut out = Vec::with_capacity(radii * angles);
    for k in 0..radii {
        let r = if radii == 1 {
            rmax
        } else {
            0.5 * rmax * (1.0 - (std::f64::consts::PI * k as f64 / (radii - 1) as f64).cos())
        };
        for a in 0..angles {
            out.push(Complex64::from_polar(r, std::f64::consts::TAU * a as f64 / angles as f64));
        }
    }
    out
}

pub fn default_disk_grid() -> Vec<Complex64> {
    disk_grid(64, 256)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralizedCarleson {
    /// Minimum over evaluated grid points of `|θ(z)| / min_n |θ_n(z)|`.
    pub ratio: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Grid estimate of the generalized Carleson constant for `θ = ∏ θ_n`.
/// Only an upper estimate of the true infimum over the disk.
pub fn generalized_carleson_ratio(factors: &[BlaschkeProduct], grid: &[Complex64]) -> Result<GeneralizedCarleson> {
    if factors.is_empty() || grid.is_empty() {
        return Err(OplabError::Precondition("need at least one factor and one grid point".into()));
    }
    if let Some(z) = grid.iter().find(|z| z.norm() >= 1.0) {
        return Err(OplabError::Invariant(format!("grid point {z} is not in the open disk")));
    }
    let floor = 1e-14f64.ln();
    let mut ratio = f64::INFINITY;
    let (mut evaluated, mut skipped) = (0, 0);
    for &z in grid {
        let mut total = 0.0;
        let mut smallest = f64::INFINITY;
        for f in factors {
            let lm = f.log_modulus(z)?;
            total += lm;
            smallest = smallest.min(lm);
        }
        if smallest < floor {
            skipped += 1;
            continue;
        }
        evaluated += 1;
        ratio = ratio.min((total - smallest).exp());
    }
    if evaluated == 0 {
        return Err(OplabError::Degenerate(format!(
            "all {skipped} grid points sit on zeros of the factors"
        )));
    }
    Ok(GeneralizedCarleson { ratio, evaluated, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(xs: &[f64]) -> Vec<DiskPoint> {
        xs.iter().map(|&x| DiskPoint::real(x).unwrap()).collect()
    }

    #[test]
    fn single_zero_has_empty_product() {
        let r = carleson_delta(&pts(&[0.5])).unwrap();
        assert_eq!(r.delta, 1.0);
        assert_eq!(r.argmin, 0);
    }

    #[test]
    fn three_point_example() {
        let r = carleson_delta(&pts(&[0.5, 0.75, 0.875])).unwrap();
        // brute force: ρ(1/2,3/4) = 0.4, ρ(3/4,7/8) = 4/11
        let oracle = 0.4 * (0.125 / (1.0 - 0.75 * 0.875));
        assert_eq!(r.argmin, 1);
        assert!((r.delta - oracle).abs() < 1e-14);
        assert!((r.delta - 0.1455).abs() < 1e-4);
    }

    #[test]
    fn duplicates_rejected() {
        assert!(carleson_delta(&pts(&[0.5, 0.5])).is_err());
        assert!(carleson_delta_from_gaps(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn geometric_family_is_stable() {
        let deltas: Vec<f64> = (4..=24)
            .map(|m| {
                let zs: Vec<f64> = (1..=m).map(|n| 1.0 - 0.5f64.powi(n)).collect();
                carleson_delta(&pts(&zs)).unwrap().delta
            })
            .collect();
        // the infinite family has δ ≈ 0.0148
        assert!(deltas.iter().all(|&d| d > 0.014));
        let last = deltas[deltas.len() - 1];
        let prev = deltas[deltas.len() - 2];
        assert!((last - prev).abs() < 1e-3 * prev);
    }

    #[test]
    fn gap_form_agrees_with_points() {
        let gaps: Vec<f64> = (1..=10).map(|n| 0.5f64.powi(n)).collect();
        let zs: Vec<f64> = gaps.iter().map(|g| 1.0 - g).collect();
        let a = carleson_delta(&pts(&zs)).unwrap();
        let b = carleson_delta_from_gaps(&gaps).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_ratio_cases() {
        let grid = disk_grid(16, 64);
        let single = BlaschkeProduct::from_complex(&[Complex64::new(0.3, 0.1)]).unwrap();
        let g = generalized_carleson_ratio(std::slice::from_ref(&single), &grid).unwrap();
        assert!((g.ratio - 1.0).abs() < 1e-12);

        let zs: Vec<Complex64> = (1..=6).map(|n| Complex64::new(1.0 - 0.5f64.powi(n), 0.0)).collect();
        let factors: Vec<BlaschkeProduct> = zs.iter().map(|&z| BlaschkeProduct::from_complex(&[z]).unwrap()).collect();
        let delta = carleson_delta(&pts(&zs.iter().map(|z| z.re).collect::<Vec<_>>())).unwrap().delta;
        // next to λ_n the ratio tends to the n-th Carleson product, so a grid
        // that visits every zero's neighbourhood sees at most δ
        let mut grid = default_disk_grid();
        grid.extend(zs.iter().map(|z| z - 1e-9));
        let est = generalized_carleson_ratio(&factors, &grid).unwrap();
        assert!(est.ratio > 0.0);
        assert!(est.ratio <= delta * (1.0 + 1e-6));
        assert!(est.ratio > 0.5 * delta);
    }

    #[test]
    fn double_zero_ratio_vanishes_near_zero() {
        let b = BlaschkeProduct::from_complex(&[Complex64::new(0.5, 0.0)]).unwrap();
        let factors = vec![b.clone(), b];
        let coarse = generalized_carleson_ratio(&factors, &[Complex64::new(0.3, 0.0)]).unwrap().ratio;
        let fine = generalized_carleson_ratio(&factors, &[Complex64::new(0.5 + 1e-6, 0.0)]).unwrap().ratio;
        assert!(fine < 1e-5 && fine < coarse);
    }

    proptest! {
        #[test]
        fn permutation_invariant(xs in proptest::collection::vec((-0.95f64..0.95, -0.3f64..0.3), 2..8), shift in 0usize..8) {
            let zs: Vec<DiskPoint> = xs.iter().filter_map(|&(a, b)| DiskPoint::new(Complex64::new(a, b)).ok()).collect();
            prop_assume!(zs.len() >= 2);
            let Ok(r) = carleson_delta(&zs) else { return Ok(()); };
            let mut rot = zs.clone();
            rot.rotate_left(shift % zs.len());
            let r2 = carleson_delta(&rot).unwrap();
            prop_assert!((r.delta - r2.delta).abs() <= 1e-12 * r.delta.max(1e-300));
        }
    }
}
