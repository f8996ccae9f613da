use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::crossratio::{AxiomReport, BenoistExperiment, HolderFit, RankEstimate};
use crate::entropy::GrowthEstimate;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        })
    }
}

/// One measured quantity against its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }

    /// Passes when `|value - target| <= tol`; `threshold` records the target.
    pub fn equals(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold: target,
            passed: (value - target).abs() <= tol,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            passed: ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub status: Status,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl LedgerEntry {
    pub fn from_checks(checks: Vec<Check>) -> Self {
        let status = if !checks.is_empty() && checks.iter().all(|c| c.passed) {
            Status::Pass
        } else {
            Status::Fail
        };
        LedgerEntry {
            status,
            checks,
            note: None,
        }
    }

    pub fn failed(note: impl Into<String>) -> Self {
        LedgerEntry {
            status: Status::Fail,
            checks: Vec::new(),
            note: Some(note.into()),
        }
    }

    pub fn skipped(note: impl Into<String>) -> Self {
        LedgerEntry {
            status: Status::Skipped,
            checks: Vec::new(),
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepSummary {
    pub label: String,
    pub dim: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub functional: String,
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyEntry {
    pub functional: String,
    pub estimate: GrowthEstimate,
    /// Shared-window ratio against the translation-length entropy.
    pub ratio_to_base: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyResults {
    pub base: GrowthEstimate,
    pub functionals: Vec<EntropyEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossRatioResults {
    pub tuples: usize,
    pub axioms: AxiomReport,
    pub gromov_max_rel: f64,
    pub invariance_max_rel: f64,
    pub adjoint_max_rel: Option<f64>,
    pub min_value: f64,
    pub benoist_question: Option<BenoistExperiment>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankResults {
    pub estimate: RankEstimate,
    pub span_dim: usize,
    pub expected: Option<usize>,
    pub p_max: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderResults {
    pub upper_bound: f64,
    pub upper_bound_word: String,
    pub flag_upper_bound: f64,
    pub fit: Option<HolderFit>,
    pub flag_fit: Option<f64>,
    pub flag_fit_per_factor: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylResults {
    pub system: String,
    pub barycenter: String,
    pub ratio_bound: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Results {
    pub classes: Option<usize>,
    pub spectra: Vec<SpectrumSummary>,
    pub entropy: Option<EntropyResults>,
    pub samples: Option<usize>,
    pub crossratio: Option<CrossRatioResults>,
    pub rank: Option<RankResults>,
    pub holder: Option<HolderResults>,
    pub weyl: Option<WeylResults>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub representation: Option<RepSummary>,
    pub results: Results,
    /// Keyed by acceptance-criterion id.
    pub ledger: BTreeMap<String, LedgerEntry>,
    pub errors: Vec<StageError>,
    /// Seconds per stage; the only nondeterministic part of a report.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.ledger.values().all(|e| e.status != Status::Fail)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// The report with timings cleared, for byte comparison across runs.
    pub fn without_timings(&self) -> RunReport {
        let mut r = self.clone();
        r.timings.clear();
        r
    }
}

/// The JSON structure with every leaf replaced by its type name; arrays keep
/// only their first element.
pub fn schema_of(v: &serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Null => Value::String("null".into()),
        Value::Bool(_) => Value::String("bool".into()),
        Value::Number(_) => Value::String("number".into()),
        Value::String(_) => Value::String("string".into()),
        Value::Array(a) => Value::Array(a.first().map(schema_of).into_iter().collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), schema_of(v))).collect()),
    }
}
