//! Optional flat key/value configuration file.
//!
//! One `key = value` pair per line, `#` comments allowed. Keys mirror the
//! long flag names (`corpus`, `steps`, `lr`, ...). Command-line flags always
//! win over file values.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> std::result::Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::user(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::user(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    idx + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    fn parse<T>(&self, key: &str) -> std::result::Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::user(format!("config key {key} has invalid value {raw:?}: {e}"))
            }),
        }
    }

    /// Flag value, then config value, then default.
    pub fn or_default<T>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> std::result::Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.parse(key)?.unwrap_or(default)),
        }
    }

    /// Flag value or config value; an error naming the flag otherwise.
    pub fn required<T>(&self, flag: Option<T>, key: &str) -> std::result::Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => self.parse(key)?.ok_or_else(|| {
                CliError::user(format!("--{key} is required (flag or config file)"))
            }),
        }
    }

    pub fn required_path(
        &self,
        flag: Option<PathBuf>,
        key: &str,
    ) -> std::result::Result<PathBuf, CliError> {
        match flag {
            Some(v) => Ok(v),
            None => match self.values.get(key) {
                Some(raw) => Ok(PathBuf::from(raw)),
                None => Err(CliError::user(format!(
                    "--{key} is required (flag or config file)"
                ))),
            },
        }
    }

    pub fn optional_path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.values.get(key).map(PathBuf::from))
    }
}
