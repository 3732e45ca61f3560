//! JSON run configurations and acceptance predicates.
//!
//! A configuration file is merged over the configuration implied by the
//! command-line flags (file values win) and then deserialized strictly:
//! unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use stabilize_core::processes::ProcessKind;
use stabilize_core::stabilization::TailDesign;
use stabilize_core::stein::{BoundInputs, McParams};
use stabilize_core::{FunctionalSpec, MarkDistribution, Point, SpaceDescriptor};

use crate::error::{Error, Result};
use crate::experiments::ExperimentSpec;

/// Where reports go: `<dir>/<stem>.json`, `<dir>/<stem>.csv`, and
/// optionally `<dir>/<stem>.svg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_stem")]
    pub stem: String,
    #[serde(default)]
    pub svg: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}
fn default_stem() -> String {
    "report".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), stem: default_stem(), svg: false }
    }
}

impl OutputSpec {
    pub fn path(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.stem))
    }
}

/// A bound on one value of a JSON report, addressed by JSON pointer
/// (e.g. `/var_slope/slope`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Predicate {
    pub pointer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equals: Option<Value>,
}

/// Result of one predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateOutcome {
    pub predicate: Predicate,
    pub value: Value,
    pub pass: bool,
}

impl Predicate {
    pub fn between(pointer: &str, min: f64, max: f64) -> Self {
        Self { pointer: pointer.into(), min: Some(min), max: Some(max), equals: None }
    }

    /// Checks the predicate; a missing value fails.
    pub fn evaluate(&self, report: &Value) -> PredicateOutcome {
        let value = report.pointer(&self.pointer).cloned().unwrap_or(Value::Null);
        let mut pass = !value.is_null();
        if self.min.is_some() || self.max.is_some() {
            match value.as_f64() {
                Some(v) => {
                    pass &= self.min.is_none_or(|m| v >= m) && self.max.is_none_or(|m| v <= m);
                }
                None => pass = false,
            }
        }
        if let Some(e) = &self.equals {
            pass &= &value == e;
        }
        PredicateOutcome { predicate: self.clone(), value, pass }
    }
}

/// Evaluates all predicates against a report.
pub fn evaluate_all(preds: &[Predicate], report: &Value) -> Vec<PredicateOutcome> {
    preds.iter().map(|p| p.evaluate(report)).collect()
}

/// `rates` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub experiment: ExperimentSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub predicates: Vec<Predicate>,
}

/// Which survival a `tails` run estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// `P(R(x) >= r)` for the radius of stabilization.
    Radius,
    /// `P(score(x) != 0)` against the distance of `x` to `K`.
    Decay,
}

/// `tails` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsConfig {
    pub mode: TailMode,
    pub functional: FunctionalSpec,
    pub space: SpaceDescriptor,
    #[serde(default)]
    pub marks: MarkDistribution,
    pub design: TailDesign,
    pub centers: Vec<Point>,
    /// Extra random points added in decay mode (at most 7).
    #[serde(default)]
    pub extras: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub predicates: Vec<Predicate>,
}

/// `stein` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteinConfig {
    pub functional: FunctionalSpec,
    pub space: SpaceDescriptor,
    pub process: ProcessKind,
    #[serde(default)]
    pub marks: MarkDistribution,
    pub sizes: Vec<f64>,
    #[serde(default)]
    pub inputs: BoundInputs,
    #[serde(default)]
    pub mc: McParams,
    #[serde(default = "default_variance_reps")]
    pub variance_reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub predicates: Vec<Predicate>,
}

fn default_variance_reps() -> usize {
    2000
}

/// `check` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub suites: Vec<crate::suites::Suite>,
    pub seed: u64,
    #[serde(default)]
    pub quick: bool,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub predicates: Vec<Predicate>,
}

/// Recursively overlays `top` onto `base` (objects merge, everything else
/// is replaced).
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, t) => *slot = t,
    }
}

/// Merges an optional file over flag-derived defaults and deserializes.
pub fn resolve<T: DeserializeOwned>(mut flags: Value, file: Option<&Path>) -> Result<T> {
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let top: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if !top.is_object() {
            return Err(Error::Config(format!("{}: expected a JSON object", path.display())));
        }
        merge(&mut flags, top);
    }
    serde_json::from_value(flags).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn predicates() {
        let r = json!({"var_slope": {"slope": 1.02}, "pass": true});
        assert!(Predicate::between("/var_slope/slope", 0.9, 1.1).evaluate(&r).pass);
        assert!(!Predicate::between("/var_slope/slope", 1.1, 1.2).evaluate(&r).pass);
        assert!(!Predicate::between("/missing", 0.0, 1.0).evaluate(&r).pass);
        let eq = Predicate { pointer: "/pass".into(), min: None, max: None, equals: Some(json!(true)) };
        assert!(eq.evaluate(&r).pass);
    }

    #[test]
    fn merge_overrides_and_rejects_unknown() {
        let mut base = json!({"a": {"b": 1, "c": 2}, "d": [1]});
        merge(&mut base, json!({"a": {"b": 5}, "d": [2, 3]}));
        assert_eq!(base, json!({"a": {"b": 5, "c": 2}, "d": [2, 3]}));
        let out: std::result::Result<OutputSpec, _> = serde_json::from_value(json!({"stem": "x", "bogus": 1}));
        assert!(out.is_err());
    }
}
