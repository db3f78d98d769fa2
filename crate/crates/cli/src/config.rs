//! `key = value` config files and flag/config/default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Resolves every option as flag > config file > default and records the
/// value that was used.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key = value", n + 1)));
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key {key}", n + 1)));
        }
    }
    Ok(map)
}

impl Resolver {
    pub fn from_file(path: Option<&Path>) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self { file, resolved: BTreeMap::new() })
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(
                    s.parse::<T>()
                        .map_err(|_| CliError::Usage(format!("config key {key}: invalid value {s:?}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
    {
        match self.optional(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.resolved.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    /// Fails on config keys the subcommand never asked for.
    pub fn finish(self) -> Result<BTreeMap<String, String>, CliError> {
        let unknown: Vec<&String> = self.file.keys().filter(|k| !self.resolved.contains_key(*k)).collect();
        if !unknown.is_empty() {
            return Err(CliError::Usage(format!("unknown config keys: {unknown:?}")));
        }
        Ok(self.resolved)
    }
}
