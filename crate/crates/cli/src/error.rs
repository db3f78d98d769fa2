use std::fmt::Debug;
use std::path::PathBuf;

use qcoupler_core::coupler::CouplerError;
use qcoupler_core::homodyne::HomodyneError;
use qcoupler_core::state::StateError;
use qcoupler_core::weak::WeakError;
use thiserror::Error;

use crate::statespec::SpecError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Coupler(#[from] CouplerError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Homodyne(#[from] HomodyneError),
    #[error(transparent)]
    Weak(#[from] WeakError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

// innermost variant name of a nested error enum, read off its Debug form
fn variant_name(e: &impl Debug) -> String {
    let dbg = format!("{e:?}");
    let mut name = String::new();
    for seg in dbg.split('(') {
        let id: String = seg.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        if id.is_empty() {
            break;
        }
        let whole = id.len() == seg.len();
        name = id;
        if !whole {
            break;
        }
    }
    name
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Spec(SpecError::Parse { .. }) => 2,
            _ => 1,
        }
    }

    /// Name of the typed error, e.g. `TargetUnreachable` or `ParseError`.
    pub fn kind(&self) -> String {
        match self {
            CliError::Usage(_) => "UsageError".into(),
            CliError::Spec(SpecError::Parse { .. }) => "ParseError".into(),
            CliError::Spec(SpecError::Normalization { .. }) => "NormalizationError".into(),
            CliError::Spec(SpecError::State(e)) | CliError::State(e) => variant_name(e),
            CliError::Coupler(e) => variant_name(e),
            CliError::Homodyne(e) => variant_name(e),
            CliError::Weak(e) => variant_name(e),
            CliError::Io { .. } => "IoError".into(),
            CliError::Csv { .. } => "CsvError".into(),
            CliError::Json { .. } => "JsonError".into(),
        }
    }
}
