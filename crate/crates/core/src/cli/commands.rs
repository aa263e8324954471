use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Certificate, CliError, CommandOutput};
use crate::error::OplabError;
use crate::interpolation::{carleson_delta, np_interpolate};
use crate::lemerdy::{counterexample_scan, LambdaFamily, ScanSettings, SequenceKind};
use crate::linalg::{self, CMat};
use crate::operator::Operator;
use crate::scalar_fn::{default_quadrature_points, BlaschkeProduct, DiskPoint, RationalFunction};
use crate::serde_ext::{self, ComplexRepr};
use crate::similarity::{lyapunov_similarity, random_similar_to_contraction};
use crate::theorem_lab::{
    a_phi, a_phi_oracle, construct_y, eigenvector_check, geometric_zeros, random_instance, random_theorem23_data,
    verify_theorem23, DEFAULT_TAIL_TARGET,
};

/// Points used to sample boundary suprema.
const BOUNDARY_POINTS: usize = 1 << 14;
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const NORM_REL_TOL: f64 = 1e-6;
pub const CONTRACTION_SLACK: f64 = 1e-8;

fn complexes(v: &[ComplexRepr]) -> Vec<Complex64> {
    v.iter().map(|&z| z.into()).collect()
}

fn disk_points(v: &[ComplexRepr]) -> Result<Vec<DiskPoint>, CliError> {
    Ok(complexes(v).into_iter().map(DiskPoint::new).collect::<Result<Vec<_>, OplabError>>()?)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn tolerances(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlesonParams {
    pub zeros: Vec<ComplexRepr>,
}

pub fn carleson(p: &CarlesonParams) -> Result<CommandOutput, CliError> {
    let report = carleson_delta(&disk_points(&p.zeros)?)?;
    Ok(CommandOutput {
        certificates: vec![Certificate::at_least("carleson.delta_positive", report.delta, f64::MIN_POSITIVE)],
        files: vec![("carleson.json".into(), json(&report))],
        seed: None,
        operations: vec!["carleson_delta"],
        tolerances: BTreeMap::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolateParams {
    pub nodes: Vec<ComplexRepr>,
    pub targets: Vec<ComplexRepr>,
}

#[derive(Serialize)]
struct InterpolateReport {
    norm: f64,
    lower: f64,
    residual: f64,
    boundary_sup: f64,
    #[serde(with = "serde_ext::complex_vec")]
    schur_parameters: Vec<Complex64>,
    #[serde(with = "serde_ext::complex_vec")]
    numerator: Vec<Complex64>,
    #[serde(with = "serde_ext::complex_vec")]
    denominator: Vec<Complex64>,
}

pub fn interpolate(p: &InterpolateParams) -> Result<CommandOutput, CliError> {
    let nodes = disk_points(&p.nodes)?;
    let targets = complexes(&p.targets);
    let f = np_interpolate(&nodes, &targets)?;
    let boundary_sup = f.phi.boundary_max(BOUNDARY_POINTS);
    let report = InterpolateReport {
        norm: f.norm,
        lower: f.lower,
        residual: f.residual,
        boundary_sup,
        schur_parameters: f.schur_parameters.clone(),
        numerator: f.phi.numerator().to_vec(),
        denominator: f.phi.denominator().to_vec(),
    };
    Ok(CommandOutput {
        certificates: vec![
            Certificate::at_most("interpolate.residual", f.residual, RESIDUAL_TOL),
            Certificate::at_most("interpolate.boundary_sup", boundary_sup, f.norm * (1.0 + NORM_REL_TOL)),
            Certificate::at_most("interpolate.bracket_width", relative(f.norm - f.lower, f.norm), NORM_REL_TOL),
        ],
        files: vec![("interpolate.json".into(), json(&report))],
        seed: None,
        operations: vec!["np_interpolate", "pick_feasible", "boundary_max"],
        tolerances: tolerances(&[("residual", RESIDUAL_TOL), ("norm_rel", NORM_REL_TOL)]),
    })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomMatrix {
    pub dim: usize,
    pub seed: u64,
    #[serde(default = "default_radius")]
    pub spectral_radius: f64,
}

fn default_radius() -> f64 {
    0.95
}

/// Either an explicit `matrix` or a seeded `random` one.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilarityParams {
    #[serde(default, with = "opt_matrix")]
    pub matrix: Option<CMat>,
    #[serde(default)]
    pub random: Option<RandomMatrix>,
}

mod opt_matrix {
    use super::*;
    use serde::Deserializer;

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CMat>, D::Error> {
        let rows = Option::<Vec<Vec<ComplexRepr>>>::deserialize(d)?;
        rows.map(|r| serde_ext::rows_to_matrix(&r).map_err(serde::de::Error::custom)).transpose()
    }
}

#[derive(Serialize)]
struct SimilarityReport {
    dim: usize,
    spectral_radius: f64,
    norm: f64,
    method: String,
    steps: usize,
    stein_margin: f64,
    cond: f64,
    conjugated_norm: f64,
    #[serde(with = "serde_ext::matrix")]
    x: CMat,
}

pub fn similarity(p: &SimilarityParams) -> Result<CommandOutput, CliError> {
    let (t, seed) = match (&p.matrix, &p.random) {
        (Some(m), None) => (m.clone(), None),
        (None, Some(r)) => (random_similar_to_contraction(r.dim, r.spectral_radius, r.seed)?, Some(r.seed)),
        _ => return Err(CliError::Input("similarity needs exactly one of `matrix` and `random`".into())),
    };
    let op = Operator::new(t)?;
    let w = lyapunov_similarity(&op)?;
    let report = SimilarityReport {
        dim: op.dim(),
        spectral_radius: op.spectral_radius(),
        norm: op.norm(),
        method: format!("{:?}", w.method),
        steps: w.steps,
        stein_margin: w.stein_margin,
        cond: w.witness.cond,
        conjugated_norm: w.witness.conjugated_norm,
        x: w.witness.x.clone(),
    };
    Ok(CommandOutput {
        certificates: vec![Certificate::at_most(
            "similarity.conjugated_norm",
            w.witness.conjugated_norm,
            1.0 + CONTRACTION_SLACK,
        )],
        files: vec![("similarity.json".into(), json(&report))],
        seed,
        operations: vec!["lyapunov_similarity"],
        tolerances: tolerances(&[("contraction_slack", CONTRACTION_SLACK)]),
    })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example41Params {
    pub n: usize,
    pub seed: u64,
    /// Scale of the Gaussian coupling `a_{jn}`; 0 decouples the blocks.
    #[serde(default = "one")]
    pub coupling_scale: f64,
    /// Zero of the Blaschke factor used as `φ` in the oracle comparison.
    #[serde(default = "default_phi_zero")]
    pub phi_zero: ComplexRepr,
    /// Free diagonal of `Y`; zeros when omitted.
    #[serde(default)]
    pub alpha: Option<Vec<ComplexRepr>>,
    #[serde(default)]
    pub quadrature_points: Option<usize>,
}

fn one() -> f64 {
    1.0
}

fn default_phi_zero() -> ComplexRepr {
    ComplexRepr::Real(0.3)
}

#[derive(Serialize)]
struct Example41Report {
    n: usize,
    delta: f64,
    gram_cond: f64,
    quadrature_points: usize,
    a_phi_error: f64,
    a_phi_oracle_diagonal: f64,
    intertwiner_residual: f64,
    conjugation_residual: f64,
    y_norm: f64,
    eigen_residuals: Vec<f64>,
    eigenvector_norms: Vec<f64>,
    norm_ceiling: f64,
    m_upper: f64,
    m_lower: f64,
    warning: Option<String>,
}

pub fn example41(p: &Example41Params) -> Result<CommandOutput, CliError> {
    let points = p.quadrature_points.unwrap_or_else(default_quadrature_points);
    let inst = random_instance(p.n, p.seed, p.coupling_scale, points)?;
    let phi = RationalFunction::blaschke_factor(DiskPoint::new(p.phi_zero.into())?);
    let direct = a_phi(&inst, &phi)?;
    let oracle = a_phi_oracle(&inst, &phi)?;
    let a_phi_error = relative(linalg::spectral_norm(&(&direct - &oracle)), linalg::spectral_norm(&oracle));
    let a_phi_oracle_diagonal = relative(
        oracle.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max),
        linalg::spectral_norm(&oracle),
    );
    let alpha = match &p.alpha {
        Some(a) => complexes(a),
        None => vec![linalg::ZERO; inst.len()],
    };
    let y = construct_y(&inst, &alpha)?;
    let ev = eigenvector_check(&inst, p.seed)?;
    let max_residual = ev.residuals.iter().copied().fold(0.0, f64::max);
    let min_norm = ev.norms.iter().copied().fold(f64::INFINITY, f64::min);
    let max_norm = ev.norms.iter().copied().fold(0.0, f64::max);
    let report = Example41Report {
        n: inst.len(),
        delta: inst.delta,
        gram_cond: inst.basis.gram_cond,
        quadrature_points: inst.basis.quadrature_points,
        a_phi_error,
        a_phi_oracle_diagonal,
        intertwiner_residual: y.relative_residual,
        conjugation_residual: y.conjugation_residual,
        y_norm: y.y_norm,
        eigen_residuals: ev.residuals.clone(),
        eigenvector_norms: ev.norms.clone(),
        norm_ceiling: ev.norm_ceiling,
        m_upper: ev.m_upper,
        m_lower: ev.m_lower,
        warning: y.warning.clone(),
    };
    Ok(CommandOutput {
        certificates: vec![
            Certificate::at_most("example41.a_phi_oracle_agreement", a_phi_error, RESIDUAL_TOL),
            Certificate::at_most("example41.a_phi_diagonal", a_phi_oracle_diagonal, RESIDUAL_TOL),
            Certificate::at_most("example41.intertwiner_residual", y.relative_residual, RESIDUAL_TOL),
            Certificate::at_most("example41.conjugation_residual", y.conjugation_residual, RESIDUAL_TOL),
            Certificate::at_most("example41.eigen_residual", max_residual, RESIDUAL_TOL),
            Certificate::at_least("example41.eigenvector_norm_lower", min_norm, 1.0 - 1e-10),
            Certificate::at_most("example41.eigenvector_norm_upper", max_norm, ev.norm_ceiling),
        ],
        files: vec![("example41.json".into(), json(&report))],
        seed: Some(p.seed),
        operations: vec![
            "random_instance",
            "build_model_basis",
            "a_phi",
            "a_phi_oracle",
            "construct_y",
            "eigenvector_check",
            "lyapunov_similarity",
            "carleson_delta",
        ],
        tolerances: tolerances(&[("residual", RESIDUAL_TOL), ("eigenvector_norm_lower", 1e-10)]),
    })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem23Params {
    /// Explicit zeros of `θ`, or `geometric: n` for `1 − 2^{−k}`, `k ≤ n`.
    #[serde(default)]
    pub zeros: Option<Vec<ComplexRepr>>,
    #[serde(default)]
    pub geometric: Option<usize>,
    pub shift_dim: usize,
    pub seed: u64,
    #[serde(default = "default_tail")]
    pub tail_target: f64,
}

fn default_tail() -> f64 {
    DEFAULT_TAIL_TARGET
}

pub fn theorem23(p: &Theorem23Params) -> Result<CommandOutput, CliError> {
    let zeros = match (&p.zeros, p.geometric) {
        (Some(z), None) => complexes(z),
        (None, Some(n)) => geometric_zeros(n),
        _ => return Err(CliError::Input("theorem23 needs exactly one of `zeros` and `geometric`".into())),
    };
    let theta = BlaschkeProduct::from_complex(&zeros)?;
    let (t0, a) = random_theorem23_data(&zeros, p.shift_dim, p.seed)?;
    let r = verify_theorem23(&t0, &a, &theta, p.shift_dim, p.tail_target)?;
    Ok(CommandOutput {
        certificates: vec![
            Certificate::at_most("theorem23.zero_blocks", r.zero_block_residual, 1e-9),
            Certificate::at_most("theorem23.identity", r.identity_residual, r.tail_bound + 1e-9),
            Certificate::at_least("theorem23.retained_lower_bound", r.retained_min_singular, 1.0 - r.tail_bound - 1e-12),
        ],
        files: vec![("theorem23.json".into(), json(&r))],
        seed: Some(p.seed),
        operations: vec!["random_theorem23_data", "verify_theorem23", "blaschke_of_operator"],
        tolerances: tolerances(&[("zero_blocks", 1e-9), ("tail_target", p.tail_target)]),
    })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemerdyScanParams {
    pub sizes: Vec<usize>,
    pub sequence: SequenceKind,
    #[serde(default = "default_lambdas")]
    pub lambdas: LambdaFamily,
    pub seed: u64,
    #[serde(default)]
    pub settings: Option<ScanSettings>,
}

fn default_lambdas() -> LambdaFamily {
    LambdaFamily::Geometric
}

pub fn lemerdy_scan(p: &LemerdyScanParams, workers: usize) -> Result<CommandOutput, CliError> {
    let mut settings = p.settings.clone().unwrap_or_default();
    settings.seed = p.seed;
    let report = counterexample_scan(&p.sizes, &p.sequence, p.lambdas, &settings, workers)?;
    Ok(CommandOutput {
        certificates: Vec::new(),
        files: vec![("scan.csv".into(), report.to_csv()), ("scan.json".into(), report.to_json() + "\n")],
        seed: Some(p.seed),
        operations: vec![
            "build_instance",
            "projection_norms",
            "power_bound_sampled",
            "tadmor_ritt_structured",
            "poly_bound_structured",
            "unconditional_constant",
            "lyapunov_similarity",
        ],
        tolerances: BTreeMap::new(),
    })
}
