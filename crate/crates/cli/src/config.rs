//! Flat `key = value` configuration with command-line overrides.
//!
//! Every lookup records the value it resolved to, defaults included, so the
//! provenance sidecar holds a complete configuration that re-runs the job.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl Config {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got {line:?}", i + 1)))?;
            cfg.set(k, v);
        }
        Ok(cfg)
    }

    /// Reads a key-value file, or the `config` object of a provenance sidecar.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Resource(format!("cannot read {}: {e}", path.display())))?;
        if !text.trim_start().starts_with('{') {
            return Self::parse(&text);
        }
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let obj = v
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| CliError::Config(format!("{}: no `config` object", path.display())))?;
        let mut cfg = Config::default();
        for (k, v) in obj {
            match v.as_str() {
                Some(s) => cfg.set(k, s),
                None => cfg.set(k, &v.to_string()),
            }
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(normalize_key(key), value.trim().to_string());
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override must be `key=value`, got {pair:?}")))?;
        self.set(k, v);
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// The raw value of `key`, or `default`.
    pub fn raw(&self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.resolved.borrow_mut().insert(key.to_string(), v.clone());
        v
    }

    pub fn get<T: FromStr + std::fmt::Display>(&self, key: &str, default: T) -> Result<T, CliError> {
        let v = self.raw(key, &default.to_string());
        v.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}")))
    }

    /// A value that may be `auto`.
    pub fn get_auto(&self, key: &str) -> Result<Option<f64>, CliError> {
        let v = self.raw(key, "auto");
        if v.eq_ignore_ascii_case("auto") {
            return Ok(None);
        }
        v.parse().map(Some).map_err(|_| CliError::Config(format!("{key}: expected a number or `auto`, got {v:?}")))
    }

    pub fn choice<T>(&self, key: &str, default: &str, parse: impl Fn(&str) -> Option<T>) -> Result<T, CliError> {
        let v = self.raw(key, default);
        parse(&v).ok_or_else(|| CliError::Config(format!("{key}: unknown value {v:?}")))
    }

    /// Comma-separated numbers; an empty value is an empty list.
    pub fn list(&self, key: &str, default: &str) -> Result<Vec<f64>, CliError> {
        let v = self.raw(key, default);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {s:?}"))))
            .collect()
    }

    /// All resolved keys in order.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.resolved.borrow().clone()
    }

    /// Keys that were given but never read.
    pub fn unused(&self) -> Vec<String> {
        let r = self.resolved.borrow();
        self.values.keys().filter(|k| !r.contains_key(*k)).cloned().collect()
    }
}
