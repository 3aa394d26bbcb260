use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cauchy_schwarz::LambdaGrid;
use crate::lattice_means::{AngleGrid, GridError, LogGridParams, ThetaGrid};
use crate::seminorms::DecisionTolerance;

/// Largest supported domain or codomain dimension.
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("tolerance `{name}` must be positive and finite (got {value})")]
    BadTolerance { name: &'static str, value: f64 },
    #[error("dimension range `{name}` must lie within [1, {MAX_DIM}] with lo <= hi (got {lo}..{hi})")]
    BadDims { name: &'static str, lo: usize, hi: usize },
    #[error("entry range must be finite with lo < hi and hi > 0 (got [{lo}, {hi}])")]
    BadEntryRange { lo: f64, hi: f64 },
    #[error("{name} grid: {source}")]
    Grid {
        name: &'static str,
        #[source]
        source: GridError,
    },
    #[error("fault injection period must be at least 1")]
    BadFaultPeriod,
    #[error("unknown theorem `{0}`")]
    UnknownTheorem(String),
    #[error("cannot parse `{0}` as a dimension or range")]
    BadDimSpec(String),
    #[error("unknown fault kind `{0}` (expected asymmetric or negative)")]
    UnknownFault(String),
}

/// The theorem suites the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Axioms,
    Cs,
    Prop23,
    Vsn,
    Sharp,
    Additivity,
    Pythagoras,
    Parallelogram,
    Oracle,
}

impl Theorem {
    pub const ALL: [Theorem; 9] = [
        Theorem::Axioms,
        Theorem::Cs,
        Theorem::Prop23,
        Theorem::Vsn,
        Theorem::Sharp,
        Theorem::Additivity,
        Theorem::Pythagoras,
        Theorem::Parallelogram,
        Theorem::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Axioms => "axioms",
            Theorem::Cs => "cs",
            Theorem::Prop23 => "prop23",
            Theorem::Vsn => "vsn",
            Theorem::Sharp => "sharp",
            Theorem::Additivity => "additivity",
            Theorem::Pythagoras => "pythagoras",
            Theorem::Parallelogram => "parallelogram",
            Theorem::Oracle => "oracle",
        }
    }

    /// Parses `all`, an empty string, or a comma-separated list of names.
    pub fn parse_list(s: &str) -> Result<Vec<Theorem>, ConfigError> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::ALL.to_vec());
        }
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let t: Theorem = part.parse()?;
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out.sort();
        Ok(out)
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ConfigError::UnknownTheorem(s.to_string()))
    }
}

/// Inclusive dimension range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimRange {
    pub lo: usize,
    pub hi: usize,
}

impl DimRange {
    pub fn exact(d: usize) -> Self {
        Self { lo: d, hi: d }
    }
}

impl FromStr for DimRange {
    type Err = ConfigError;

    /// `"4"` or `"2..8"` (inclusive).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::BadDimSpec(s.to_string());
        match s.split_once("..") {
            Some((a, b)) => Ok(Self {
                lo: a.trim().parse().map_err(|_| bad())?,
                hi: b.trim().trim_start_matches('=').parse().map_err(|_| bad())?,
            }),
            None => Ok(Self::exact(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryRange {
    pub lo: f64,
    pub hi: f64,
}

/// Residual thresholds for the sub-checks that do not use `tolerances.rel`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub cs_identity: f64,
    pub cs_inequality: f64,
    pub chain: f64,
    pub square_identity: f64,
    pub prop23: f64,
    pub sandwich: f64,
    pub defect_sandwich: f64,
    pub defect_gap: f64,
    pub box_times_gap: f64,
    pub box_plus_gap: f64,
    pub quarter_circle: f64,
    pub orthogonality: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            cs_identity: 1e-8,
            cs_inequality: 1e-10,
            chain: 1e-10,
            square_identity: 1e-10,
            prop23: 1e-10,
            sandwich: 1e-12,
            defect_sandwich: 1e-10,
            defect_gap: 1e-4,
            box_times_gap: 1e-3,
            box_plus_gap: 1e-5,
            quarter_circle: 1e-12,
            orthogonality: 1e-10,
        }
    }
}

impl Thresholds {
    fn named(&self) -> [(&'static str, f64); 12] {
        [
            ("cs_identity", self.cs_identity),
            ("cs_inequality", self.cs_inequality),
            ("chain", self.chain),
            ("square_identity", self.square_identity),
            ("prop23", self.prop23),
            ("sandwich", self.sandwich),
            ("defect_sandwich", self.defect_sandwich),
            ("defect_gap", self.defect_gap),
            ("box_times_gap", self.box_times_gap),
            ("box_plus_gap", self.box_plus_gap),
            ("quarter_circle", self.quarter_circle),
            ("orthogonality", self.orthogonality),
        ]
    }
}

/// Everything a single check needs besides the instance. Stored with each
/// counterexample so it can be replayed without the surrounding config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckSettings {
    pub tolerances: DecisionTolerance,
    pub thresholds: Thresholds,
    pub theta_grid: LogGridParams,
    /// Uniform angles on `[0, 2π]`; the axis angles are always added.
    pub angle_grid: usize,
    pub lambda_grid: LogGridParams,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            tolerances: DecisionTolerance::default(),
            thresholds: Thresholds::default(),
            theta_grid: LogGridParams {
                lo: 1e-8,
                hi: 1e8,
                count: 10_000,
            },
            angle_grid: 4096,
            lambda_grid: LogGridParams {
                lo: 1e-6,
                hi: 1e6,
                count: 2001,
            },
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::BadTolerance { name, value })
    }
}

impl CheckSettings {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        positive("rel", t.rel)?;
        positive("abs", t.abs)?;
        positive("cone_band", t.cone_band)?;
        for (name, v) in self.thresholds.named() {
            positive(name, v)?;
        }
        ThetaGrid::from_params(self.theta_grid).map_err(|source| ConfigError::Grid { name: "theta", source })?;
        AngleGrid::full(self.angle_grid).map_err(|source| ConfigError::Grid { name: "angle", source })?;
        LambdaGrid::from_params(self.lambda_grid).map_err(|source| ConfigError::Grid { name: "lambda", source })?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    /// Adds 1 to entry (0, 1) of the first matrix.
    Asymmetric,
    /// Replaces the first matrix by `−I`.
    Negative,
}

impl FromStr for FaultKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asymmetric" => Ok(FaultKind::Asymmetric),
            "negative" => Ok(FaultKind::Negative),
            _ => Err(ConfigError::UnknownFault(s.to_string())),
        }
    }
}

/// Corrupts every `every`-th generated instance (trial indices divisible by
/// `every`), forcing a PSD family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultInjection {
    pub kind: FaultKind,
    pub every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    /// Domain dimension `m`.
    pub m: DimRange,
    /// Codomain dimension `n`.
    pub n: DimRange,
    /// Range of vector entries; weights are drawn from `[0, hi]`.
    pub entry_range: EntryRange,
    pub checks: CheckSettings,
    pub theorems: Vec<Theorem>,
    /// Counterexamples kept per theorem.
    pub max_counterexamples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<FaultInjection>,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 10_000,
            m: DimRange { lo: 1, hi: 6 },
            n: DimRange { lo: 1, hi: 4 },
            entry_range: EntryRange { lo: -10.0, hi: 10.0 },
            checks: CheckSettings::default(),
            theorems: Theorem::ALL.to_vec(),
            max_counterexamples: 5,
            fault: None,
        }
    }
}

fn check_dims(name: &'static str, r: DimRange) -> Result<(), ConfigError> {
    if r.lo >= 1 && r.lo <= r.hi && r.hi <= MAX_DIM {
        Ok(())
    } else {
        Err(ConfigError::BadDims { name, lo: r.lo, hi: r.hi })
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        check_dims("m", self.m)?;
        check_dims("n", self.n)?;
        let e = self.entry_range;
        if !(e.lo.is_finite() && e.hi.is_finite() && e.lo < e.hi && e.hi > 0.0) {
            return Err(ConfigError::BadEntryRange { lo: e.lo, hi: e.hi });
        }
        if let Some(f) = self.fault {
            if f.every == 0 {
                return Err(ConfigError::BadFaultPeriod);
            }
        }
        self.checks.validate()
    }

    pub fn runs(&self, t: Theorem) -> bool {
        self.theorems.contains(&t)
    }
}
