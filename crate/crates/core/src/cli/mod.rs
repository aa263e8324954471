//! Batch front end: scenario files, pipeline dispatch, reports and manifest.

mod commands;
pub mod selftest;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use commands::{
    CarlesonParams, Example41Params, InterpolateParams, LemerdyScanParams, RandomMatrix, SimilarityParams,
    Theorem23Params,
};

use crate::error::OplabError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CERTIFICATE: i32 = 2;

/// A scenario document: `{"command": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenario {
    Carleson(CarlesonParams),
    Interpolate(InterpolateParams),
    Similarity(SimilarityParams),
    Example41(Example41Params),
    Theorem23(Theorem23Params),
    LemerdyScan(LemerdyScanParams),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Carleson(_) => "carleson",
            Scenario::Interpolate(_) => "interpolate",
            Scenario::Similarity(_) => "similarity",
            Scenario::Example41(_) => "example41",
            Scenario::Theorem23(_) => "theorem23",
            Scenario::LemerdyScan(_) => "lemerdy-scan",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or schema-violating input; exit 1.
    Input(String),
    /// A module rejected the data or a numerical step failed; exit 2.
    Module(OplabError),
    /// Every pipeline step ran but some certificates failed; exit 2.
    Certificate(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Module(_) | CliError::Certificate(_) => EXIT_CERTIFICATE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Module(e) => write!(f, "{e}"),
            CliError::Certificate(names) => write!(f, "certificate failed: {}", names.join(", ")),
        }
    }
}

impl From<OplabError> for CliError {
    fn from(e: OplabError) -> Self {
        CliError::Module(e)
    }
}

/// Parses a scenario, reporting the offending field path on schema errors.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Input(format!("at `{path}`: {}", e.inner()))
    })
}

/// One checked inequality `value ≤ limit` (or `≥` when `at_least`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub at_least: bool,
    pub passed: bool,
}

impl Certificate {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Certificate { name: name.into(), value, limit, at_least: false, passed: value <= limit }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Certificate { name: name.into(), value, limit, at_least: true, passed: value >= limit }
    }
}

/// What a pipeline produced before anything is written.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub files: Vec<(String, String)>,
    pub certificates: Vec<Certificate>,
    pub seed: Option<u64>,
    /// Library operations whose results appear in the reports.
    pub operations: Vec<&'static str>,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input_sha256: String,
    pub seed: Option<u64>,
    pub quadrature_points: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub operations: Vec<String>,
    pub outputs: Vec<ManifestFile>,
    pub certificates: Vec<Certificate>,
    pub passed: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub parallel: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { out: PathBuf::from("oplab-out"), parallel: 1 }
    }
}

pub fn execute(scenario: &Scenario, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    Ok(match scenario {
        Scenario::Carleson(p) => commands::carleson(p)?,
        Scenario::Interpolate(p) => commands::interpolate(p)?,
        Scenario::Similarity(p) => commands::similarity(p)?,
        Scenario::Example41(p) => commands::example41(p)?,
        Scenario::Theorem23(p) => commands::theorem23(p)?,
        Scenario::LemerdyScan(p) => commands::lemerdy_scan(p, opts.parallel)?,
    })
}

/// Runs a scenario given as text and writes the reports plus
/// `manifest.json` into `opts.out`. Returns the manifest; certificate
/// failures are reported after everything has been written.
pub fn run_scenario_text(text: &str, opts: &RunOptions) -> Result<Manifest, CliError> {
    let scenario = parse_scenario(text)?;
    let output = execute(&scenario, opts)?;
    write_reports(scenario.name(), text, output, &opts.out)
}

/// Writes the reports and the manifest into `out`, then fails with the names
/// of any failed certificates.
pub fn write_reports(command: &str, input: &str, output: CommandOutput, out: &Path) -> Result<Manifest, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Input(format!("cannot create {}: {e}", out.display())))?;
    let mut outputs = Vec::new();
    for (name, contents) in &output.files {
        let path = out.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        outputs.push(ManifestFile { name: name.clone(), sha256: sha256_hex(contents.as_bytes()) });
    }
    let passed = output.certificates.iter().all(|c| c.passed);
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        input_sha256: sha256_hex(input.as_bytes()),
        seed: output.seed,
        quadrature_points: crate::scalar_fn::default_quadrature_points(),
        tolerances: output.tolerances,
        operations: output.operations.iter().map(|s| s.to_string()).collect(),
        outputs,
        certificates: output.certificates,
        passed,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = out.join("manifest.json");
    std::fs::write(&path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    if !passed {
        let failed = manifest
            .certificates
            .iter()
            .filter(|c| !c.passed)
            .map(|c| {
                let op = if c.at_least { ">=" } else { "<=" };
                format!("{} ({:e} {op} {:e} violated)", c.name, c.value, c.limit)
            })
            .collect();
        return Err(CliError::Certificate(failed));
    }
    Ok(manifest)
}

pub fn run_scenario(path: &Path, opts: &RunOptions) -> Result<Manifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    run_scenario_text(&text, opts)
}
