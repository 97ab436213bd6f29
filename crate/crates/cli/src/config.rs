//! `key=value` run configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long
//! flag names without leading dashes; `_` and `-` are interchangeable.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path, allowed: &[&str]) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path, allowed)
    }

    pub fn parse(text: &str, path: &Path, allowed: &[&str]) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "{}:{}: expected key=value, found `{line}`",
                    path.display(),
                    i + 1
                ))
            })?;
            let key = key.trim().replace('_', "-");
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "{}:{}: unknown key `{key}` (expected one of {})",
                    path.display(),
                    i + 1,
                    allowed.join(", ")
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Parses `key` if present, naming the key on failure.
    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| {
                    CliError::Usage(format!("config key `{key}`: invalid value `{v}`: {e}"))
                })
            })
            .transpose()
    }

    /// Overwrites `slot` with the config value for `key`, if any.
    pub fn apply<T: std::str::FromStr>(
        &self,
        key: &str,
        slot: &mut Option<T>,
    ) -> Result<(), CliError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.get(key)? {
            *slot = Some(v);
        }
        Ok(())
    }
}
