use std::path::Path;

use corona_core::dataset::DatasetError;
use corona_core::evolve::{ConfigError, EvolveError};
use corona_core::models::ModelError;
use corona_core::propagation::PropagationError;
use thiserror::Error;

/// Input errors exit with 2, computation failures with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 1,
        }
    }

    pub fn input(msg: impl Into<String>) -> CliError {
        CliError::Input(msg.into())
    }

    pub fn compute(msg: impl Into<String>) -> CliError {
        CliError::Compute(msg.into())
    }

    pub(crate) fn write(path: &Path, err: std::io::Error) -> CliError {
        CliError::Compute(format!("cannot write {}: {err}", path.display()))
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(format!("config: {e}"))
    }
}

impl From<EvolveError> for CliError {
    fn from(e: EvolveError) -> Self {
        match e {
            EvolveError::Config(_) | EvolveError::Spec(_) | EvolveError::EmptyDataset => CliError::Input(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Domain { .. } | ModelError::Graph { .. } => CliError::Compute(e.to_string()),
            ModelError::Unknown(_) => CliError::Input(format!(
                "{e}; known models: {}",
                corona_core::models::ModelRegistry::builtin().slugs().join(", ")
            )),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<PropagationError> for CliError {
    fn from(e: PropagationError) -> Self {
        match e {
            PropagationError::Geometry(_) | PropagationError::CoincidentPoint { .. } | PropagationError::Parameter(_) => {
                CliError::Input(e.to_string())
            }
            PropagationError::Model(m) => m.into(),
            other => CliError::Compute(other.to_string()),
        }
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
