//! Experiment configuration: JSON schema, parsing and resolution.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hamsynth::cost::CostMode;
use hamsynth::linalg::parse_matrix_text;
use hamsynth::optimize::OptimizerConfig;
use hamsynth::pauli::{standard_spec, HamiltonianSpec, ParamVector, Preset};
use hamsynth::targets::{builtin, BuiltinTarget, TargetGate};
use hamsynth::trotter::TrotterConfig;

use crate::CliError;

/// Target reference: a builtin name or a matrix file
/// (`"toffoli"` / `{"file": "gate.txt"}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetRef {
    Name(String),
    File { file: PathBuf },
}

/// Term-set reference: a preset name or an explicit term list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecRef {
    Preset(String),
    Explicit(HamiltonianSpec),
}

/// A full experiment description, loadable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub target: TargetRef,
    pub spec: SpecRef,
    pub trotter: TrotterConfig,
    #[serde(default = "default_cost_mode")]
    pub cost_mode: CostMode,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_cost_mode() -> CostMode {
    CostMode::ExactTrace
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(CliError::Json)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Fully resolved experiment inputs.
pub struct ResolvedExperiment {
    pub target: TargetGate,
    pub spec: HamiltonianSpec,
    /// Set when the term set came from a fixed preset with published values.
    pub published_params: Option<ParamVector>,
}

/// Resolve names and files; relative paths are taken from `base_dir`
/// (typically the config file's directory).
pub fn resolve(config: &ExperimentConfig, base_dir: &Path) -> Result<ResolvedExperiment, CliError> {
    let target = match &config.target {
        TargetRef::Name(name) => builtin(name.parse::<BuiltinTarget>()?),
        TargetRef::File { file } => {
            let path = if file.is_absolute() {
                file.clone()
            } else {
                base_dir.join(file)
            };
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let matrix = parse_matrix_text(&text)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "user-target".into());
            TargetGate::from_matrix(name, matrix)?
        }
    };

    let (spec, published_params) = match &config.spec {
        SpecRef::Preset(name) => {
            let preset: Preset = name.parse()?;
            let spec = standard_spec(preset, target.n_qubits)?;
            (spec, preset.published_params())
        }
        SpecRef::Explicit(spec) => (spec.clone(), None),
    };

    if spec.n_qubits() != target.n_qubits {
        return Err(CliError::Config(format!(
            "term set is over {} qubits but target '{}' has {}",
            spec.n_qubits(),
            target.name,
            target.n_qubits
        )));
    }
    config.trotter.validate()?;
    config.cost_mode.validate()?;
    config.optimizer.validate()?;
    Ok(ResolvedExperiment {
        target,
        spec,
        published_params,
    })
}
