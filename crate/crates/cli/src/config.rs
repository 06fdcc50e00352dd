//! Flat `key = value` config files. Command-line flags always take precedence.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Blank lines and lines starting with `#` are skipped. Keys may use
    /// `-` or `_` interchangeably.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key=value", i + 1);
            };
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                bail!("line {}: empty key", i + 1);
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("config key {key}: {e}")))
            .transpose()
    }
}

/// Flag value, else config value, else `default`.
pub fn resolve<T>(flag: Option<T>, cfg: &ConfigFile, key: &str, default: T) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(v),
        None => Ok(cfg.get(key)?.unwrap_or(default)),
    }
}
