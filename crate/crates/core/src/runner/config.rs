//! Flat key=value experiment configuration with command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// The experiment families the runner can execute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    RegimeMap,
    Relax,
    VarianceGrowth,
    BreaktimeScan,
    ScalingScan,
    EhrenfestScan,
    AppendixA,
}

impl Experiment {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "regime_map" => Self::RegimeMap,
            "relax" => Self::Relax,
            "variance_growth" => Self::VarianceGrowth,
            "breaktime_scan" => Self::BreaktimeScan,
            "scaling_scan" => Self::ScalingScan,
            "ehrenfest_scan" => Self::EhrenfestScan,
            "appendix_a" => Self::AppendixA,
            other => {
                return Err(Error::Config(format!(
                    "unknown experiment '{other}' (expected one of regime_map, relax, \
                     variance_growth, breaktime_scan, scaling_scan, ehrenfest_scan, appendix_a)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::RegimeMap => "regime_map",
            Self::Relax => "relax",
            Self::VarianceGrowth => "variance_growth",
            Self::BreaktimeScan => "breaktime_scan",
            Self::ScalingScan => "scaling_scan",
            Self::EhrenfestScan => "ehrenfest_scan",
            Self::AppendixA => "appendix_a",
        }
    }
}

/// Parsed configuration: a sorted key-value map. Angles are given in
/// degrees in the file and converted exactly once by the accessors.
#[derive(Clone, Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn from_entries(entries: &[(&str, &str)]) -> Self {
        Self {
            entries: entries
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Parses `key = value` lines; `#` starts a comment, blanks ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` command-line override.
    pub fn set_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            Error::Config(format!("override '{assignment}' is not key=value"))
        })?;
        self.entries
            .insert(key.trim().to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .parse()
            .map_err(|e| Error::Config(format!("key '{key}': {e}")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.f64(key),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.require(key)?
            .parse()
            .map_err(|e| Error::Config(format!("key '{key}': {e}")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.usize(key),
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.require(key)?
            .parse()
            .map_err(|e| Error::Config(format!("key '{key}': {e}")))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.u64(key),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.require(key)?;
        let mut out = Vec::new();
        for part in raw.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            out.push(
                part.parse()
                    .map_err(|e| Error::Config(format!("key '{key}': '{part}': {e}")))?,
            );
        }
        if out.is_empty() {
            return Err(Error::Config(format!("key '{key}' lists no values")));
        }
        Ok(out)
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => {
                let mut out = Vec::new();
                for part in raw.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    out.push(part.parse().map_err(|e| {
                        Error::Config(format!("key '{key}': '{part}': {e}"))
                    })?);
                }
                Ok(out)
            }
        }
    }

    /// Initial-state angles `(theta_s, phi_s, theta_l, phi_l)`, converted
    /// from degrees to radians.
    pub fn ic_angles(&self) -> Result<[f64; 4]> {
        Ok([
            self.f64("theta_s")?.to_radians(),
            self.f64("phi_s")?.to_radians(),
            self.f64("theta_l")?.to_radians(),
            self.f64("phi_l")?.to_radians(),
        ])
    }

    /// Canonical sorted `key = value` representation.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// Short hex digest of the canonical form, echoed into every CSV.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
