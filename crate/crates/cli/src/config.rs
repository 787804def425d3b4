//! Flat `key = value` config files. Keys are long flag names.

use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use toml::{Table, Value};

#[derive(Debug, Default)]
pub struct ConfigFile {
    table: Table,
}

fn flatten(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(flatten).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let table: Table = text.parse()?;
        Ok(Self { table })
    }

    /// The value under `key`, parsed with the same grammar as the flag.
    pub fn get<T>(&self, key: &str) -> anyhow::Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.table
            .get(key)
            .map(|v| {
                flatten(v)
                    .parse::<T>()
                    .map_err(|e| anyhow!("invalid `{key}` in config: {e}"))
            })
            .transpose()
    }

    /// The flag if given, else the config entry.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> anyhow::Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}
