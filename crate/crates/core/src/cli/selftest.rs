//! Fixed example suite with a per-module pass/fail table. Every check is
//! deterministic, so the printed table is byte-identical across runs.

use num_complex::Complex64;

use super::{execute, parse_scenario, RunOptions};
use crate::interpolation::{carleson_delta, np_interpolate};
use crate::lemerdy::{build_instance, counterexample_scan, make_sequence, LambdaFamily, ScanSettings, SequenceKind};
use crate::linalg::{self, c, CMat};
use crate::operator::{blaschke_of_operator, poly_of_operator, power_bound, Operator};
use crate::scalar_fn::{default_quadrature_points, h2_inner, BlaschkeProduct, DiskPoint, RationalFunction};
use crate::similarity::{lyapunov_similarity, random_similar_to_contraction};

pub struct CheckResult {
    pub module: &'static str,
    pub name: &'static str,
    pub outcome: Result<(), String>,
}

type CheckFn = fn() -> Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn blaschke_origin_factor() -> Result<(), String> {
    let b = BlaschkeProduct::from_complex(&[c(0.0)]).map_err(err)?;
    let z = Complex64::new(0.3, -0.2);
    let v = b.eval(z).map_err(err)?;
    ensure((v - z).norm() < 1e-15, || format!("b_0(z) = {v}, expected {z}"))
}

fn h2_kernel_norm() -> Result<(), String> {
    let lambda = DiskPoint::new(Complex64::new(0.4, 0.5)).map_err(err)?;
    let k = RationalFunction::cauchy_kernel(lambda);
    let v = h2_inner(&k, &k, default_quadrature_points()).map_err(|e| format!("h2_inner: {e}"))?;
    let expected = 1.0 / (1.0 - lambda.modulus().powi(2));
    ensure((v.re - expected).abs() < 1e-10 * expected && v.im.abs() < 1e-10, || format!("‖k‖² = {v}, expected {expected}"))
}

fn h2_monomials_orthogonal() -> Result<(), String> {
    let one = RationalFunction::constant(c(1.0));
    let z = RationalFunction::identity();
    let v = h2_inner(&one, &z, default_quadrature_points()).map_err(|e| format!("h2_inner: {e}"))?;
    ensure(v.norm() < 1e-14, || format!("⟨1, z⟩ = {v}"))
}

fn carleson_three_points() -> Result<(), String> {
    let xs = [0.5, 0.75, 0.875];
    let pts: Vec<DiskPoint> = xs.iter().map(|&x| DiskPoint::real(x)).collect::<Result<_, _>>().map_err(err)?;
    let r = carleson_delta(&pts).map_err(err)?;
    let rho = |a: f64, b: f64| ((a - b) / (1.0 - a * b)).abs();
    let expected = (0..3)
        .map(|i| (0..3).filter(|&k| k != i).map(|k| rho(xs[i], xs[k])).product::<f64>())
        .fold(f64::INFINITY, f64::min);
    ensure((r.delta - expected).abs() < 1e-14, || format!("δ = {}, expected {expected}", r.delta))
}

fn pick_schwarz_extremal() -> Result<(), String> {
    // φ(0) = 0, φ(1/2) = 1/2 forces φ(z) = z, of norm exactly 1
    let nodes = [DiskPoint::real(0.0).map_err(err)?, DiskPoint::real(0.5).map_err(err)?];
    let f = np_interpolate(&nodes, &[c(0.0), c(0.5)]).map_err(err)?;
    ensure((f.norm - 1.0).abs() < 1e-6 && f.residual < 1e-8, || {
        format!("norm {} residual {:e}", f.norm, f.residual)
    })
}

fn annihilation() -> Result<(), String> {
    let lambdas = [c(0.2), Complex64::new(0.0, -0.4), Complex64::new(0.6, 0.1)];
    let s = CMat::from_fn(3, 3, |i, j| if i == j { c(1.0) } else { c(0.1 * (i + 2 * j) as f64) });
    let t = Operator::new(&s * linalg::diag(&lambdas) * linalg::inverse(&s).map_err(err)?).map_err(err)?;
    let theta = BlaschkeProduct::from_complex(&lambdas).map_err(err)?;
    let v = blaschke_of_operator(&theta, &t).map_err(err)?.norm();
    ensure(v < 1e-9 * t.norm(), || format!("‖θ(T)‖ = {v:e}"))
}

fn powers_of_nilpotent() -> Result<(), String> {
    let j = CMat::from_fn(3, 3, |i, k| if k == i + 1 { c(1.0) } else { c(0.0) });
    let t = Operator::new(j).map_err(err)?;
    let p = power_bound(&t, 8).map_err(err)?;
    let cube = poly_of_operator(&[c(0.0), c(0.0), c(0.0), c(1.0)], &t).norm();
    ensure(p.value == 1.0 && cube == 0.0, || format!("sup ‖Tⁿ‖ = {}, ‖T³‖ = {cube}", p.value))
}

fn stein_seeded() -> Result<(), String> {
    let t = Operator::new(random_similar_to_contraction(12, 0.9, 7).map_err(err)?).map_err(err)?;
    let w = lyapunov_similarity(&t).map_err(err)?;
    ensure(w.witness.conjugated_norm <= 1.0 + 1e-8, || format!("‖XTX⁻¹‖ = {}", w.witness.conjugated_norm))
}

fn stein_zero_operator() -> Result<(), String> {
    let w = lyapunov_similarity(&Operator::zeros(4)).map_err(err)?;
    ensure((w.witness.cond - 1.0).abs() < 1e-12, || format!("cond = {}", w.witness.cond))
}

fn run_quiet(text: &str) -> Result<super::CommandOutput, String> {
    let scenario = parse_scenario(text).map_err(err)?;
    execute(&scenario, &RunOptions::default()).map_err(err)
}

fn all_certificates(out: &super::CommandOutput) -> Result<(), String> {
    match out.certificates.iter().find(|c| !c.passed) {
        Some(c) => Err(format!("{} = {:e} against {:e}", c.name, c.value, c.limit)),
        None => Ok(()),
    }
}

fn example41_uncoupled() -> Result<(), String> {
    let out = run_quiet(r#"{"command": "example41", "params": {"n": 3, "seed": 1, "coupling_scale": 0.0}}"#)?;
    all_certificates(&out)?;
    let residuals = ["a_phi_oracle_agreement", "intertwiner_residual", "conjugation_residual"];
    for c in out.certificates.iter().filter(|c| residuals.iter().any(|r| c.name.ends_with(r))) {
        ensure(c.value == 0.0, || format!("{} = {:e}, expected 0", c.name, c.value))?;
    }
    Ok(())
}

fn example41_seeded() -> Result<(), String> {
    all_certificates(&run_quiet(r#"{"command": "example41", "params": {"n": 4, "seed": 5}}"#)?)
}

fn theorem23_geometric() -> Result<(), String> {
    all_certificates(&run_quiet(
        r#"{"command": "theorem23", "params": {"geometric": 2, "shift_dim": 96, "seed": 3, "tail_target": 1e-6}}"#,
    )?)
}

fn lemerdy_uncoupled() -> Result<(), String> {
    let seq = make_sequence(&SequenceKind::Custom(vec![]), 16).map_err(err)?;
    let inst = build_instance(&seq, &LambdaFamily::Geometric.gaps(16), 16).map_err(err)?;
    let powers = inst.spectral_values(|k| c(0.5).powi(k as i32));
    let v = inst.norm_of(&powers);
    ensure(v == 1.0, || format!("‖T⁰‖ = {v}"))
}

fn lemerdy_scan_small() -> Result<(), String> {
    let settings = ScanSettings { tr_angles: 32, poly_degree: 3, poly_trials: 1, uncond_samples: 4, uncond_flips: 4, ..Default::default() };
    let run = || counterexample_scan(&[8, 16], &SequenceKind::LogHarmonic, LambdaFamily::Geometric, &settings, 1).map_err(err);
    let (a, b) = (run()?, run()?);
    ensure(a.to_csv() == b.to_csv(), || "scan output differs between runs".into())?;
    ensure(a.rows.iter().all(|r| r.proj_max >= 1.0 && r.uncond_lower >= 1.0), || "constants below 1".into())
}

fn schema_rejection() -> Result<(), String> {
    match parse_scenario(r#"{"command": "carleson", "params": {"zeros": [0.5, true]}}"#) {
        Ok(_) => Err("malformed scenario accepted".into()),
        Err(e) => ensure(e.to_string().contains("zeros[1]"), || format!("error lacks field path: {e}")),
    }
}

fn deterministic_reports() -> Result<(), String> {
    let text = r#"{"command": "similarity", "params": {"random": {"dim": 6, "seed": 11}}}"#;
    let (a, b) = (run_quiet(text)?, run_quiet(text)?);
    ensure(a.files == b.files, || "reports differ between runs".into())
}

const CHECKS: &[(&str, &str, CheckFn)] = &[
    ("scalar_fn", "blaschke_origin_factor", blaschke_origin_factor),
    ("scalar_fn", "h2_kernel_norm", h2_kernel_norm),
    ("scalar_fn", "h2_monomials_orthogonal", h2_monomials_orthogonal),
    ("interpolation", "carleson_three_points", carleson_three_points),
    ("interpolation", "pick_schwarz_extremal", pick_schwarz_extremal),
    ("operator_core", "annihilation", annihilation),
    ("operator_core", "powers_of_nilpotent", powers_of_nilpotent),
    ("similarity", "stein_seeded", stein_seeded),
    ("similarity", "stein_zero_operator", stein_zero_operator),
    ("theorem_lab", "example41_uncoupled", example41_uncoupled),
    ("theorem_lab", "example41_seeded", example41_seeded),
    ("theorem_lab", "theorem23_geometric", theorem23_geometric),
    ("lemerdy", "uncoupled_norm", lemerdy_uncoupled),
    ("lemerdy", "scan_small", lemerdy_scan_small),
    ("cli", "schema_rejection", schema_rejection),
    ("cli", "deterministic_reports", deterministic_reports),
];

pub fn run_checks() -> Vec<CheckResult> {
    CHECKS.iter().map(|&(module, name, f)| CheckResult { module, name, outcome: f() }).collect()
}

/// The table printed by `oplab selftest`, and whether every check passed.
pub fn selftest_report() -> (String, bool) {
    let results = run_checks();
    let mut out = format!("{:<14} {:<26} {}\n", "module", "check", "result");
    for r in &results {
        let status = match &r.outcome {
            Ok(()) => "PASS".to_string(),
            Err(e) => format!("FAIL  {e}"),
        };
        out.push_str(&format!("{:<14} {:<26} {}\n", r.module, r.name, status));
    }
    let mut modules: Vec<&str> = results.iter().map(|r| r.module).collect();
    modules.dedup();
    out.push('\n');
    for m in modules {
        let total = results.iter().filter(|r| r.module == m).count();
        let passed = results.iter().filter(|r| r.module == m && r.outcome.is_ok()).count();
        let status = if passed == total { "PASS" } else { "FAIL" };
        out.push_str(&format!("{m:<14} {passed}/{total} {status}\n"));
    }
    let ok = results.iter().all(|r| r.outcome.is_ok());
    (out, ok)
}
