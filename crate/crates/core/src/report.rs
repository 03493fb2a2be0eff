//! Named residual checks, collected into reports.

use std::collections::BTreeMap;

use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

/// One residual compared against its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(residual: f64, tolerance: f64) -> Self {
        // NaN residuals fail
        Self { residual, tolerance, pass: residual < tolerance }
    }
}

/// A set of named checks. Serialises as `{name: {residual, tolerance, pass}}`
/// in lexicographic key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: BTreeMap<String, Check>,
    /// Spectral condition number of the intertwiner, when one is involved.
    pub condition_number: Option<f64>,
    /// Reported-only quantities; they never affect [`all_pass`](Self::all_pass).
    pub notes: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) -> &Check {
        let name = name.into();
        self.checks.insert(name.clone(), Check::new(residual, tolerance));
        &self.checks[&name]
    }

    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &Check)> {
        self.checks.iter().filter(|(_, c)| !c.pass).map(|(k, c)| (k.as_str(), c))
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.get(name)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.values().fold(0.0, |m, c| m.max(c.residual))
    }

    /// Copies every check of `other` under `prefix.name`.
    pub fn absorb(&mut self, prefix: &str, other: &VerificationReport) {
        for (k, c) in &other.checks {
            self.checks.insert(format!("{prefix}.{k}"), *c);
        }
        for (k, v) in &other.notes {
            self.notes.insert(format!("{prefix}.{k}"), *v);
        }
    }
}

impl Serialize for VerificationReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.checks.len()))?;
        for (k, c) in &self.checks {
            map.serialize_entry(k, c)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails() {
        assert!(!Check::new(f64::NAN, 1.0).pass);
        assert!(Check::new(0.5, 1.0).pass);
        assert!(!Check::new(1.0, 1.0).pass);
    }

    #[test]
    fn json_shape() {
        let mut r = VerificationReport::new();
        r.record("b_check", 1e-12, 1e-9);
        r.record("a_check", 2.0, 1.0);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"a_check":{"residual":2.0,"tolerance":1.0,"pass":false},"b_check":{"residual":1e-12,"tolerance":1e-9,"pass":true}}"#
        );
        assert!(!r.all_pass());
        assert_eq!(r.failures().map(|(k, _)| k).collect::<Vec<_>>(), ["a_check"]);
    }
}
