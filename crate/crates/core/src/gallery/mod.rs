//! Named worked examples. Each scenario builds its data, runs the relevant
//! checks and returns a JSON-serializable report.

mod examples;
pub mod shapes;

pub use examples::{alternating_target, consistency_instance};

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::exactgeo::GeoError;
use crate::grid::GridError;
use crate::icheck::IcError;
use crate::solve::SolveError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GalleryError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid override for `{scenario}`: {message}")]
    InvalidOverride { scenario: String, message: String },
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Ic(#[from] IcError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Where the expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// A value stated with the worked example.
    Stated,
    /// An independent computation inside the scenario.
    Oracle,
    /// An algebraic identity that must hold to rounding.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expected {
    Near { target: f64, tol: f64 },
    AtMost { bound: f64 },
    AtLeast { bound: f64 },
    Within { lo: f64, hi: f64 },
}

impl Expected {
    pub fn accepts(&self, x: f64) -> bool {
        match *self {
            Expected::Near { target, tol } => (x - target).abs() <= tol,
            Expected::AtMost { bound } => x <= bound,
            Expected::AtLeast { bound } => x >= bound,
            Expected::Within { lo, hi } => lo <= x && x <= hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub expected: Expected,
    pub passed: bool,
    pub basis: Basis,
}

impl Check {
    pub fn new(name: impl Into<String>, computed: f64, expected: Expected, basis: Basis) -> Self {
        Check {
            name: name.into(),
            computed,
            passed: expected.accepts(computed),
            expected,
            basis,
        }
    }

    pub fn near(name: impl Into<String>, computed: f64, target: f64, tol: f64, basis: Basis) -> Self {
        Self::new(name, computed, Expected::Near { target, tol }, basis)
    }

    /// Boolean outcome encoded as 1 (true) or 0.
    pub fn flag(name: impl Into<String>, ok: bool, basis: Basis) -> Self {
        Self::near(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0, basis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario: String,
    pub title: String,
    /// Effective parameters after overrides.
    pub params: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub notes: Vec<String>,
    /// Raw numbers for plotting or inspection.
    pub fields: BTreeMap<String, Value>,
}

impl ScenarioReport {
    fn new(scenario: &str, title: &str, params: &impl Serialize) -> Self {
        ScenarioReport {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            title: title.into(),
            params: serde_json::to_value(params).expect("params serialize"),
            checks: vec![],
            passed: false,
            notes: vec![],
            fields: BTreeMap::new(),
        }
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn field(&mut self, key: &str, v: impl Serialize) {
        self.fields.insert(key.into(), serde_json::to_value(v).expect("field serialize"));
    }

    fn finish(mut self) -> Self {
        self.passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub title: String,
    pub defaults: Value,
}

type Runner = fn(Value) -> Result<ScenarioReport, GalleryError>;

const CATALOG: &[(&str, &str, Runner)] = &[
    ("signed-ic", "a signed measure meeting the isoperimetric condition only through cancellation", examples::signed_ic),
    ("non-finite", "the condition does not force finite total variation", examples::non_finite),
    ("failure-lsc", "lower semicontinuity fails without the condition", examples::failure_lsc),
    ("non-exist", "no minimizer in the extreme case", examples::non_exist),
    ("non-consist", "infimum over smooth functions exceeds the relaxed minimum", examples::non_consist),
    ("til1", "the condition for an integrand does not imply it for the mirrored one", examples::til1),
    ("til2", "small-volume failure for the mirrored integrand on a fractal measure", examples::til2),
    ("unrectifiable-cancel", "equal plus and minus masses cancel in the relaxed functional", examples::unrectifiable_cancel),
];

pub fn catalog() -> Vec<ScenarioInfo> {
    CATALOG
        .iter()
        .map(|(name, title, _)| ScenarioInfo {
            name: (*name).into(),
            title: (*title).into(),
            defaults: examples::defaults(name),
        })
        .collect()
}

pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|c| c.0).collect()
}

/// Runs a scenario. `overrides` is a JSON object whose keys must be
/// parameters of that scenario; `Value::Null` keeps the defaults.
pub fn run(name: &str, overrides: Value) -> Result<ScenarioReport, GalleryError> {
    let (_, _, f) = CATALOG
        .iter()
        .find(|c| c.0 == name)
        .ok_or_else(|| GalleryError::UnknownScenario(name.into()))?;
    f(overrides)
}

fn params<P: DeserializeOwned + Default>(scenario: &str, v: Value) -> Result<P, GalleryError> {
    match v {
        Value::Null => Ok(P::default()),
        Value::Object(_) => serde_json::from_value(v).map_err(|e| GalleryError::InvalidOverride {
            scenario: scenario.into(),
            message: e.to_string(),
        }),
        _ => Err(GalleryError::InvalidOverride {
            scenario: scenario.into(),
            message: "overrides must be a JSON object".into(),
        }),
    }
}

fn title(name: &str) -> &'static str {
    CATALOG.iter().find(|c| c.0 == name).map(|c| c.1).unwrap_or("")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_scenario() {
        assert_eq!(run("unknown", Value::Null), Err(GalleryError::UnknownScenario("unknown".into())));
    }

    #[test]
    fn unknown_override_key_is_rejected() {
        let r = run("til1", serde_json::json!({"bogus": 1}));
        assert!(matches!(r, Err(GalleryError::InvalidOverride { .. })), "{r:?}");
    }

    #[test]
    fn catalog_lists_every_scenario() {
        let c = catalog();
        assert_eq!(c.len(), 8);
        assert!(c.iter().all(|s| s.defaults.is_object()));
    }
}
