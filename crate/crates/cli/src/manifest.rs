use std::fs;
use std::path::{Path, PathBuf};

use berkhyb_core::exact::{rat, rat_vec};
use berkhyb_core::monge_ampere::experiments::{default_test_functions, TestFunction};
use berkhyb_core::monge_ampere::GridConfig;
use berkhyb_core::Q;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const MANIFEST_SCHEMA: &str = "berkhyb.manifest/1";
pub const SUITE_SCHEMA: &str = "berkhyb.suite/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ValEval,
    Retract,
    NaLimit,
    MaModel,
    MaConverge,
    MzCheck,
    Lelong,
    RhoR,
    PathLimit,
    LseGap,
    Cln,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::ValEval => "val-eval",
            Kind::Retract => "retract",
            Kind::NaLimit => "na-limit",
            Kind::MaModel => "ma-model",
            Kind::MaConverge => "ma-converge",
            Kind::MzCheck => "mz-check",
            Kind::Lelong => "lelong",
            Kind::RhoR => "rho-r",
            Kind::PathLimit => "path-limit",
            Kind::LseGap => "lse-gap",
            Kind::Cln => "cln",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    ValEval(ValEvalParams),
    Retract(RetractParams),
    NaLimit(NaLimitParams),
    MaModel(MaModelParams),
    MaConverge(MaConvergeParams),
    MzCheck(MzCheckParams),
    Lelong(LelongParams),
    RhoR(RhoRParams),
    PathLimit(PathLimitParams),
    LseGap(LseGapParams),
    Cln(ClnParams),
}

impl Experiment {
    pub fn kind(&self) -> Kind {
        match self {
            Experiment::ValEval(_) => Kind::ValEval,
            Experiment::Retract(_) => Kind::Retract,
            Experiment::NaLimit(_) => Kind::NaLimit,
            Experiment::MaModel(_) => Kind::MaModel,
            Experiment::MaConverge(_) => Kind::MaConverge,
            Experiment::MzCheck(_) => Kind::MzCheck,
            Experiment::Lelong(_) => Kind::Lelong,
            Experiment::RhoR(_) => Kind::RhoR,
            Experiment::PathLimit(_) => Kind::PathLimit,
            Experiment::LseGap(_) => Kind::LseGap,
            Experiment::Cln(_) => Kind::Cln,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValEvalParams {
    pub models: String,
    /// Empty means every model in the file.
    #[serde(default)]
    pub model_names: Vec<String>,
    pub count: usize,
    pub max_terms: usize,
    pub exponent_bound: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetractParams {
    pub models: String,
    /// Points per model.
    pub count: usize,
    #[serde(default = "yes")]
    pub lifts: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaLimitParams {
    pub models: String,
    pub families: Vec<String>,
    #[serde(with = "rat")]
    pub r: Q,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaModelParams {
    #[serde(default)]
    pub tables: Vec<String>,
    #[serde(default)]
    pub curves: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaConvergeParams {
    pub family: String,
    pub schedule: Vec<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_test_functions")]
    pub test_functions: Vec<TestFunction>,
    #[serde(default = "default_slack")]
    pub monotone_slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1_threshold: Option<f64>,
}

fn default_slack() -> f64 {
    1e-12
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedVerdict {
    pub path: String,
    pub psh: bool,
    #[serde(default)]
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomFsParams {
    pub count: usize,
    pub max_terms: usize,
    pub n_bound: i64,
    pub m_max: u32,
    /// Constants are drawn as `k/denominator` with `|k| ≤ 2·denominator`.
    pub denominator: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MzCheckParams {
    /// Fubini-Study families whose slope-sum identity is required.
    #[serde(default)]
    pub families: Vec<String>,
    /// Fubini-Study families whose identity is only reported.
    #[serde(default)]
    pub witnesses: Vec<String>,
    #[serde(default)]
    pub functions: Vec<ExpectedVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomFsParams>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiParams {
    pub start_decade: u32,
    pub end_decade: u32,
    pub per_decade: u32,
}

/// `amplitude·cos(frequency·arg t) + linear·|t|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub amplitude: f64,
    pub frequency: i32,
    #[serde(default)]
    pub linear: f64,
}

impl Perturbation {
    pub fn eval(&self, t: num_complex::Complex64) -> f64 {
        self.amplitude * (self.frequency as f64 * t.arg()).cos() + self.linear * t.norm()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LelongParams {
    /// Laurent data in `t`; the potential is `log|f|`.
    pub function: String,
    pub radii: RadiiParams,
    pub angles: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    pub tolerance: f64,
    #[serde(default)]
    pub perturbations: Vec<Perturbation>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoRParams {
    pub function: String,
    pub r: f64,
    pub count: usize,
    pub min_log10: f64,
    pub max_log10: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLimitParams {
    pub function: String,
    #[serde(default = "z_label")]
    pub z: String,
    pub c: [f64; 2],
    #[serde(with = "rat_vec")]
    pub weights: Vec<Q>,
    pub schedule: Vec<f64>,
    pub tolerance: f64,
}

fn z_label() -> String {
    "z".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LseGapParams {
    pub samples: usize,
    pub max_n: usize,
    pub ms: Vec<u32>,
    pub range: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClnParams {
    pub family: String,
    pub perturb: Vec<usize>,
    #[serde(with = "rat_vec")]
    pub deltas: Vec<Q>,
    #[serde(default = "default_residual")]
    pub residual_tol: f64,
}

fn default_residual() -> f64 {
    0.05
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteManifest {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub manifests: Vec<String>,
}

/// A manifest together with the directory its relative paths resolve against.
#[derive(Clone, Debug)]
pub struct LoadedManifest {
    pub manifest: ExperimentManifest,
    pub path: PathBuf,
    pub base: PathBuf,
}

impl LoadedManifest {
    pub fn resolve(&self, rel: &str) -> PathBuf {
        self.base.join(rel)
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(&self.manifest).expect("manifests serialize")
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| HarnessError::json(path, e))
}

fn base_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn load_manifest(path: &Path, seed_override: Option<u64>) -> Result<LoadedManifest> {
    let mut manifest: ExperimentManifest = read_json(path)?;
    if manifest.schema != MANIFEST_SCHEMA {
        return Err(HarnessError::input(path, format!("schema `{}`, expected `{MANIFEST_SCHEMA}`", manifest.schema)));
    }
    if let Some(s) = seed_override {
        manifest.seed = s;
    }
    let loaded = LoadedManifest { manifest, path: path.to_path_buf(), base: base_of(path) };
    validate(&loaded)?;
    Ok(loaded)
}

pub fn load_suite(path: &Path, seed_override: Option<u64>) -> Result<(SuiteManifest, Vec<LoadedManifest>)> {
    let mut suite: SuiteManifest = read_json(path)?;
    if suite.schema != SUITE_SCHEMA {
        return Err(HarnessError::input(path, format!("schema `{}`, expected `{SUITE_SCHEMA}`", suite.schema)));
    }
    if let Some(s) = seed_override {
        suite.seed = s;
    }
    let base = base_of(path);
    let mut loaded = Vec::new();
    for rel in &suite.manifests {
        let m = load_manifest(&base.join(rel), Some(suite.seed))?;
        if loaded.iter().any(|o: &LoadedManifest| o.manifest.name == m.manifest.name) {
            return Err(HarnessError::input(path, format!("duplicate experiment name `{}`", m.manifest.name)));
        }
        loaded.push(m);
    }
    Ok((suite, loaded))
}

fn positive(path: &Path, what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(HarnessError::input(path, format!("{what} must be positive, got {x}")))
    }
}

fn exists(m: &LoadedManifest, rel: &str) -> Result<()> {
    let p = m.resolve(rel);
    if p.is_file() {
        Ok(())
    } else {
        Err(HarnessError::input(&m.path, format!("referenced file {} does not exist", p.display())))
    }
}

/// Tolerances are positive and every referenced file exists.
pub fn validate(m: &LoadedManifest) -> Result<()> {
    let path = &m.path;
    if m.manifest.name.is_empty() || m.manifest.name.contains(['/', '\\']) {
        return Err(HarnessError::input(path, "experiment name must be a non-empty file stem"));
    }
    match &m.manifest.experiment {
        Experiment::ValEval(s) => {
            exists(m, &s.models)?;
            if s.max_terms == 0 || s.exponent_bound < 0 {
                return Err(HarnessError::input(path, "max_terms must be positive and exponent_bound non-negative"));
            }
        }
        Experiment::Retract(s) => exists(m, &s.models)?,
        Experiment::NaLimit(s) => {
            exists(m, &s.models)?;
            for f in &s.families {
                exists(m, f)?;
            }
        }
        Experiment::MaModel(s) => {
            for f in s.tables.iter().chain(&s.curves) {
                exists(m, f)?;
            }
        }
        Experiment::MaConverge(s) => {
            exists(m, &s.family)?;
            if let Some(th) = s.w1_threshold {
                positive(path, "w1_threshold", th)?;
            }
            positive(path, "grid.mass_tol", s.grid.mass_tol)?;
        }
        Experiment::MzCheck(s) => {
            for f in s.families.iter().chain(&s.witnesses) {
                exists(m, f)?;
            }
            for f in &s.functions {
                exists(m, &f.path)?;
            }
            if let Some(r) = &s.random {
                if r.max_terms == 0 || r.n_bound < 1 || r.m_max == 0 || r.denominator < 1 {
                    return Err(HarnessError::input(path, "random family bounds must be positive"));
                }
            }
        }
        Experiment::Lelong(s) => {
            exists(m, &s.function)?;
            positive(path, "tolerance", s.tolerance)?;
        }
        Experiment::RhoR(s) => {
            exists(m, &s.function)?;
            positive(path, "tolerance", s.tolerance)?;
            if !(s.min_log10 < s.max_log10 && s.max_log10 < 0.0) {
                return Err(HarnessError::input(path, "need min_log10 < max_log10 < 0"));
            }
        }
        Experiment::PathLimit(s) => {
            exists(m, &s.function)?;
            positive(path, "tolerance", s.tolerance)?;
        }
        Experiment::LseGap(s) => {
            positive(path, "range", s.range)?;
            if s.max_n == 0 || s.ms.is_empty() || s.ms.contains(&0) {
                return Err(HarnessError::input(path, "max_n and every m must be positive"));
            }
        }
        Experiment::Cln(s) => {
            exists(m, &s.family)?;
            positive(path, "residual_tol", s.residual_tol)?;
        }
    }
    Ok(())
}
