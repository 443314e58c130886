//! Per-command configuration files. Each is a JSON object with a `schema`
//! field naming the command and version; unknown keys are rejected.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use strip_spectra_core::curves::CurveFamily;
use strip_spectra_core::discretize::EndCondition;
use strip_spectra_core::eigensolve::{Method, Preconditioner};
use strip_spectra_core::experiments::{
    BentConfig, HardyConfig, MeshRung, ModelSpec, QuasimodeConfig, StabilityConfig, ThinConfig,
};
use strip_spectra_core::profile::Profile;

use crate::error::{RunError, RunResult};

pub const SCHEMA_VERSION: u32 = 1;

pub fn schema_name(command: &str) -> String {
    format!("strip-spectra/{command}/v{SCHEMA_VERSION}")
}

/// A command configuration; `seed` is `None` for deterministic commands.
pub trait RunConfig: DeserializeOwned + Serialize {
    const COMMAND: &'static str;

    fn seed(&self) -> Option<u64> {
        None
    }

    fn set_seed(&mut self, _seed: u64) {}
}

/// Checks the `schema` field and deserializes the rest of the object.
pub fn parse<C: RunConfig>(text: &str) -> RunResult<C> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value.as_object_mut().ok_or_else(|| RunError::config("configuration must be a JSON object"))?;
    let expected = schema_name(C::COMMAND);
    match obj.remove("schema") {
        Some(serde_json::Value::String(s)) if s == expected => {}
        Some(other) => return Err(RunError::config(format!("schema {other} does not match `{expected}`"))),
        None => return Err(RunError::config(format!("missing `schema` field (expected `{expected}`)"))),
    }
    Ok(serde_json::from_value(value)?)
}

/// Inverse of [`parse`].
pub fn to_json<C: RunConfig>(config: &C) -> RunResult<serde_json::Value> {
    let mut value = serde_json::to_value(config).map_err(|e| RunError::Other(e.into()))?;
    if let Some(obj) = value.as_object_mut() {
        obj.insert("schema".into(), schema_name(C::COMMAND).into());
    }
    Ok(value)
}

fn default_true() -> bool {
    true
}

fn default_separation() -> f64 {
    1e-3
}

fn default_eigs() -> usize {
    5
}

fn default_tol() -> f64 {
    1e-9
}

fn default_end() -> EndCondition {
    EndCondition::Dirichlet
}

fn default_preconditioner() -> Preconditioner {
    Preconditioner::ShiftedCholesky
}

fn default_method() -> Method {
    Method::Auto
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    pub curve: CurveFamily,
    pub dim: usize,
    pub s_range: [f64; 2],
    pub count: usize,
    /// Defaults to the middle node.
    #[serde(default)]
    pub start_index: Option<usize>,
    #[serde(default)]
    pub initial_normals: Option<Vec<Vec<f64>>>,
}

impl RunConfig for FrameConfig {
    const COMMAND: &'static str = "frame";
}

/// `s` window `[-S, S]` with `count` model nodes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub s_half: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub model: ModelSpec,
    pub window: Window,
    pub t_samples: usize,
    #[serde(default = "default_separation")]
    pub min_separation: f64,
}

impl RunConfig for SurfaceConfig {
    const COMMAND: &'static str = "surface";
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub model: ModelSpec,
    pub mesh: MeshRung,
    #[serde(default = "default_end")]
    pub end: EndCondition,
    #[serde(default = "default_eigs")]
    pub eigenvalues: usize,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default = "default_preconditioner")]
    pub preconditioner: Preconditioner,
    /// Also solve on the halved mesh and report the Richardson values.
    #[serde(default = "default_true")]
    pub extrapolate: bool,
    #[serde(default)]
    pub export_matrices: bool,
}

impl RunConfig for SpectrumConfig {
    const COMMAND: &'static str = "spectrum";

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaConfig {
    pub model: ModelSpec,
    pub window: Window,
    /// Transverse interior nodes.
    pub nt: usize,
    /// Use the potential formulation; requires an unbent strip.
    #[serde(default)]
    pub potential_form: bool,
    #[serde(default = "default_true")]
    pub extrapolate: bool,
}

impl RunConfig for LambdaConfig {
    const COMMAND: &'static str = "lambda";
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialChoice {
    VEff,
    /// Transverse average of `V_a` at half-width `a`.
    VA {
        a: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveConfig {
    pub model: ModelSpec,
    pub window: Window,
    /// Interior nodes of the 1D mesh on `(-S, S)`.
    pub ns: usize,
    #[serde(default = "default_eigs")]
    pub eigenvalues: usize,
    pub potential: PotentialChoice,
}

impl RunConfig for EffectiveConfig {
    const COMMAND: &'static str = "effective";
}

impl RunConfig for HardyConfig {
    const COMMAND: &'static str = "hardy";

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialSearchConfig {
    /// Half-length of the `s` window integrated over.
    pub window: f64,
    pub eta: Profile,
    pub n: Vec<usize>,
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BentRunConfig {
    pub study: BentConfig,
    #[serde(default)]
    pub trial: Option<TrialSearchConfig>,
}

impl RunConfig for BentRunConfig {
    const COMMAND: &'static str = "bent";

    fn seed(&self) -> Option<u64> {
        Some(self.study.seed)
    }

    fn set_seed(&mut self, seed: u64) {
        self.study.seed = seed;
    }
}

impl RunConfig for StabilityConfig {
    const COMMAND: &'static str = "stability";

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasimodeRunConfig {
    pub study: QuasimodeConfig,
    /// Energies in units of `E_1`.
    pub eta_over_e1: Vec<f64>,
    pub n: Vec<usize>,
}

impl RunConfig for QuasimodeRunConfig {
    const COMMAND: &'static str = "quasimode";
}

impl RunConfig for ThinConfig {
    const COMMAND: &'static str = "thin-sweep";

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub model: ModelSpec,
    pub window: Window,
}

impl RunConfig for ValidateConfig {
    const COMMAND: &'static str = "validate";
}
