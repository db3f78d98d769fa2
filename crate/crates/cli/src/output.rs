//! CSV and JSON writers. Floats are written in the shortest form that parses
//! back to the same `f64`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Plain decimal for moderate magnitudes, exponent form outside `[1e-4, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })
        }
        _ => Ok(()),
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    ensure_parent(path)?;
    let err = |source| CliError::Csv { path: path.into(), source };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json { path: path.into(), source })?;
    std::fs::write(path, text + "\n").map_err(|source| CliError::Io { path: path.into(), source })
}

/// `<dir>/<stem><suffix>` next to `primary`.
pub fn sibling(primary: &Path, suffix: &str) -> PathBuf {
    let stem = primary.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    primary.with_file_name(format!("{stem}{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e22, f64::MIN_POSITIVE, 4.000000000000001] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/run.csv"), ".fit.json"), PathBuf::from("out/run.fit.json"));
    }
}
