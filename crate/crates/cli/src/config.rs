//! Flat `key = value` configuration with `[section]` headers.
//!
//! Commands read keys through [`Config`] getters that record the value
//! actually used, defaults included. The recorded set is written back as the
//! resolved configuration, and keys nobody read are reported as errors.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

type Table = BTreeMap<String, BTreeMap<String, String>>;

#[derive(Debug, Default)]
pub struct Config {
    raw: Table,
    used: RefCell<Vec<(String, String, String)>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Table::new();
        let mut section = String::from("run");
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| anyhow!("line {}: unterminated section header", i + 1))?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let entry = raw.entry(section.clone()).or_default();
            if entry.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                bail!("line {}: duplicate key `{}` in [{section}]", i + 1, k.trim());
            }
        }
        Ok(Self { raw, used: RefCell::default() })
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Self::parse(&text)
            }
            None => Ok(Self::default()),
        }
    }

    /// Overrides a key as if it had been written in the file.
    pub fn set(&mut self, section: &str, key: &str, value: impl ToString) {
        self.raw.entry(section.to_string()).or_default().insert(key.to_string(), value.to_string());
    }

    fn record(&self, section: &str, key: &str, value: String) {
        let mut used = self.used.borrow_mut();
        if !used.iter().any(|(s, k, _)| s == section && k == key) {
            used.push((section.to_string(), key.to_string(), value));
        }
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.raw.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.raw(section, key).is_some()
    }

    pub fn get<T: FromStr + ToString>(&self, section: &str, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let value = match self.raw(section, key) {
            Some(s) => s.parse::<T>().map_err(|e| anyhow!("[{section}] {key} = {s}: {e}"))?,
            None => default,
        };
        self.record(section, key, value.to_string());
        Ok(value)
    }

    pub fn require<T: FromStr + ToString>(&self, section: &str, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.raw(section, key).ok_or_else(|| anyhow!("[{section}] missing required key `{key}`"))?;
        let value = s.parse::<T>().map_err(|e| anyhow!("[{section}] {key} = {s}: {e}"))?;
        self.record(section, key, value.to_string());
        Ok(value)
    }

    pub fn get_str(&self, section: &str, key: &str, default: &str) -> String {
        let value = self.raw(section, key).unwrap_or(default).to_string();
        self.record(section, key, value.clone());
        value
    }

    /// Comma-separated list of numbers.
    pub fn get_list(&self, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let list = match self.raw(section, key) {
            Some(s) => s
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("[{section}] {key}: `{t}`: {e}")))
                .collect::<Result<Vec<_>>>()?,
            None => default.to_vec(),
        };
        let text = list.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        self.record(section, key, text);
        Ok(list)
    }

    /// Numeric keys of `section` whose names start with `prefix`, with the
    /// prefix stripped (profile parameters such as `candidate.level`).
    pub fn params(&self, section: &str, prefix: &str, skip: &[&str]) -> Result<BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        if let Some(s) = self.raw.get(section) {
            for (k, v) in s {
                if let Some(name) = k.strip_prefix(prefix) {
                    if name.is_empty() || skip.contains(&name) {
                        continue;
                    }
                    let x: f64 = v.parse().map_err(|e| anyhow!("[{section}] {k} = {v}: {e}"))?;
                    self.record(section, k, x.to_string());
                    out.insert(name.to_string(), x);
                }
            }
        }
        Ok(out)
    }

    /// Fails on keys in `sections` that no getter consumed.
    pub fn check_unused(&self, sections: &[&str]) -> Result<()> {
        let used: BTreeSet<(String, String)> = self.used.borrow().iter().map(|(s, k, _)| (s.clone(), k.clone())).collect();
        for s in sections {
            if let Some(table) = self.raw.get(*s) {
                for k in table.keys() {
                    if !used.contains(&(s.to_string(), k.clone())) {
                        bail!("[{s}] unknown key `{k}`");
                    }
                }
            }
        }
        for s in self.raw.keys() {
            if !sections.contains(&s.as_str()) {
                bail!("section [{s}] does not apply to this command");
            }
        }
        Ok(())
    }

    /// The recorded keys as config text, sections in first-use order and
    /// keys sorted within each section.
    pub fn resolved(&self) -> String {
        let used = self.used.borrow();
        let mut order: Vec<&str> = Vec::new();
        for (s, _, _) in used.iter() {
            if !order.contains(&s.as_str()) {
                order.push(s);
            }
        }
        let mut out = String::new();
        for s in order {
            let mut keys: Vec<(&str, &str)> = used.iter().filter(|(t, _, _)| t == s).map(|(_, k, v)| (k.as_str(), v.as_str())).collect();
            keys.sort();
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "[{s}]");
            for (k, v) in keys {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let c = Config::parse("n = 2\n# comment\n[curvature]\nkind = sqrt  # trailing\nradii = 0.5, 1\n").unwrap();
        assert_eq!(c.get::<usize>("run", "n", 1).unwrap(), 2);
        assert_eq!(c.get::<f64>("run", "alpha", 0.5).unwrap(), 0.5);
        assert_eq!(c.get_str("curvature", "kind", "constant"), "sqrt");
        assert_eq!(c.get_list("curvature", "radii", &[]).unwrap(), vec![0.5, 1.0]);
        c.check_unused(&["run", "curvature"]).unwrap();
        let text = c.resolved();
        assert!(text.starts_with("[run]\nalpha = 0.5\nn = 2\n"));
        // the resolved text parses back to the same values
        let again = Config::parse(&text).unwrap();
        assert_eq!(again.get::<usize>("run", "n", 1).unwrap(), 2);
        assert_eq!(again.get_list("curvature", "radii", &[]).unwrap(), vec![0.5, 1.0]);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let c = Config::parse("[curvature]\nkidn = sqrt\n").unwrap();
        assert!(c.check_unused(&["run", "curvature"]).is_err());
        assert!(Config::parse("a = 1\na = 2\n").is_err());
        assert!(Config::parse("[oops\n").is_err());
        let c = Config::parse("[slide]\neps0 = 0.1\n").unwrap();
        assert!(c.check_unused(&["run", "curvature"]).is_err());
    }

    #[test]
    fn prefixed_parameters() {
        let c = Config::parse("[slide]\ncandidate.kind = constant\ncandidate.level = 0.5\n").unwrap();
        let p = c.params("slide", "candidate.", &["kind"]).unwrap();
        assert_eq!(p.get("level"), Some(&0.5));
        assert_eq!(p.len(), 1);
    }
}
