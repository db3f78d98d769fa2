use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Reproduction record written next to every output as `<stem>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Every resolved option, flag names without `--`; feeding these back as a
    /// config file reproduces the outputs.
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub version: String,
    pub duration_s: f64,
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let stem = primary.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    primary.with_file_name(format!("{stem}.manifest.json"))
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|source| CliError::Json { path: path.into(), source })?;
        std::fs::write(path, text + "\n").map_err(|source| CliError::Io { path: path.into(), source })
    }
}
