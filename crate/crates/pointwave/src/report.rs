//! Machine-readable run report.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: Relation::AtMost,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: Relation::AtLeast,
            pass: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config_digest: String,
    pub snapped_xi: Option<f64>,
    pub checks: Vec<Check>,
    /// Measured quantities that are not pass/fail (fitted rates, gains, ...).
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    pub wall_time: f64,
    pub pass: bool,
}

/// Hex SHA-256 of the raw config bytes.
pub fn config_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReport {
    pub fn new(command: &str, config_bytes: &[u8]) -> Self {
        Self {
            command: command.to_string(),
            config_digest: config_digest(config_bytes),
            snapped_xi: None,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            artifacts: Vec::new(),
            wall_time: 0.0,
            pass: true,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sha256_hex() {
        assert_eq!(
            config_digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn pass_is_conjunction_of_checks() {
        let mut r = RunReport::new("verify", b"{}");
        assert!(r.pass);
        r.check(Check::at_most("a", 1.0, 2.0));
        r.check(Check::at_least("b", 3.0, 2.0));
        assert!(r.pass);
        r.check(Check::at_most("c", f64::NAN, 1.0));
        assert!(!r.pass);
        assert_eq!(r.failed().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["c"]);
    }

    #[test]
    fn report_serializes_relations() {
        let mut r = RunReport::new("kernels", b"{}");
        r.check(Check::at_least("rate", 1.0, 0.8));
        let v: serde_json::Value = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(v["checks"][0]["relation"], ">=");
        assert_eq!(v["pass"], true);
    }
}
