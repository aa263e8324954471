use num_complex::Complex64;
use oplab::interpolation::np_interpolate;
use oplab::linalg;
use oplab::operator::Operator;
use oplab::scalar_fn::DiskPoint;
use oplab::similarity::{lyapunov_similarity, random_similar_to_contraction};
use proptest::prelude::*;

fn node() -> impl Strategy<Value = Complex64> {
    (0.0..0.85f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn separated(zs: &[Complex64]) -> bool {
    zs.iter().enumerate().all(|(i, a)| zs[..i].iter().all(|b| ((a - b) / (Complex64::new(1.0, 0.0) - b.conj() * a)).norm() > 0.05))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stein_witness_contracts(dim in 2usize..10, radius in 0.1..0.97f64, seed in 0u64..1000) {
        let t = Operator::new(random_similar_to_contraction(dim, radius, seed).unwrap()).unwrap();
        prop_assert!(t.spectral_radius() <= radius + 1e-9);
        let w = lyapunov_similarity(&t).unwrap();
        prop_assert!(w.witness.conjugated_norm <= 1.0 + 1e-8);
        prop_assert!(w.witness.cond >= 1.0 - 1e-12);
        let xtx = &w.witness.x * t.matrix() * &w.witness.x_inv;
        prop_assert!((linalg::spectral_norm(&xtx) - w.witness.conjugated_norm).abs() < 1e-8);
    }

    #[test]
    fn pick_interpolant_hits_targets(data in prop::collection::vec((node(), node()), 1..5)) {
        let nodes: Vec<Complex64> = data.iter().map(|p| p.0).collect();
        prop_assume!(separated(&nodes));
        let targets: Vec<Complex64> = data.iter().map(|p| p.1).collect();
        let pts: Vec<DiskPoint> = nodes.iter().map(|&z| DiskPoint::new(z).unwrap()).collect();
        let f = np_interpolate(&pts, &targets).unwrap();
        for (z, w) in nodes.iter().zip(&targets) {
            prop_assert!((f.phi.eval(*z) - w).norm() <= 1e-8 * (1.0 + f.norm));
        }
        // the norm is at least the largest target and the boundary sup respects it
        let max_target = targets.iter().map(|w| w.norm()).fold(0.0, f64::max);
        prop_assert!(f.norm >= max_target * (1.0 - 1e-9));
        prop_assert!(f.phi.boundary_max(4096) <= f.norm * (1.0 + 1e-6));
    }
}
