use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::checks::Checker;
use super::config::{CheckSettings, ConfigError, Theorem, TrialConfig};
use crate::sip::Instance;

pub const SCHEMA: &str = "riesz-sip/1";

const BORDERLINE_POLICY: &str = "equality biconditionals are not tallied when the cone test \
     lands in (-cone_band, -abs) relative to the scale of the comparison";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema `{0}`")]
    Schema(String),
}

/// A failing instance, the violated sub-check and everything needed to
/// rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub theorem: Theorem,
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trial: Option<usize>,
    pub residual: f64,
    pub threshold: f64,
    pub settings: CheckSettings,
    pub instance: Instance,
}

impl Counterexample {
    /// Reruns the named check on the stored instance and returns its residual.
    /// A sub-check that is not produced any more replays as 0.
    pub fn replay(&self) -> Result<f64, ConfigError> {
        let checker = Checker::new(self.settings)?;
        Ok(replay_with(&checker, self.theorem, &self.check, &self.instance))
    }

    /// Whether the named check still fails on the stored instance.
    pub fn fails(&self) -> Result<bool, ConfigError> {
        let checker = Checker::new(self.settings)?;
        Ok(checker
            .run(self.theorem, &self.instance)
            .get(&self.check)
            .is_some_and(|s| s.failed()))
    }
}

fn replay_with(checker: &Checker, theorem: Theorem, check: &str, inst: &Instance) -> f64 {
    checker
        .run(theorem, inst)
        .get(check)
        .map_or(0.0, |s| s.residual)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub threshold: f64,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub worst_instance: Option<usize>,
    pub failures: usize,
    pub borderline: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub trials: usize,
    pub passes: usize,
    pub failures: usize,
    pub borderline: usize,
    /// Largest residual over all sub-checks; see `checks` for per-check values.
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub worst_instance: Option<usize>,
    /// Failures caused by instance generation rather than a check.
    pub generation_failures: usize,
    pub checks: BTreeMap<String, CheckSummary>,
    pub counterexamples: Vec<Counterexample>,
}

impl TheoremSummary {
    pub(crate) fn empty() -> Self {
        Self {
            trials: 0,
            passes: 0,
            failures: 0,
            borderline: 0,
            max_residual: 0.0,
            worst_instance: None,
            generation_failures: 0,
            checks: BTreeMap::new(),
            counterexamples: Vec::new(),
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.get(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub config: TrialConfig,
    pub borderline_policy: String,
    pub theorems: BTreeMap<Theorem, TheoremSummary>,
    pub wall_time_s: f64,
}

impl VerificationReport {
    pub(crate) fn new(config: TrialConfig) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            config,
            borderline_policy: BORDERLINE_POLICY.to_string(),
            theorems: BTreeMap::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.theorems.values().all(|t| t.failures == 0)
    }

    /// 0 when every trial passed or was borderline, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn without_wall_time(&self) -> Self {
        Self {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = &Counterexample> {
        self.theorems.values().flat_map(|t| &t.counterexamples)
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, ReportError> {
        let r: Self = serde_json::from_str(s)?;
        if r.schema != SCHEMA {
            return Err(ReportError::Schema(r.schema));
        }
        Ok(r)
    }
}

pub fn emit_report(report: &VerificationReport, path: &Path) -> Result<(), ReportError> {
    let mut s = report.to_json()?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<VerificationReport, ReportError> {
    VerificationReport::from_json(&fs::read_to_string(path)?)
}
