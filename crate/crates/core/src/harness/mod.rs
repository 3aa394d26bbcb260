//! Randomized verification of the library's theorems: instance generation,
//! per-instance checks, suites, oracle convergence studies, counterexample
//! shrinking and JSON reports.

mod checks;
mod config;
mod generate;
mod report;
mod shrink;
mod study;
mod suite;

pub use checks::{CheckOutcome, Checker, SubCheck, TrialStatus};
pub use config::{
    CheckSettings, ConfigError, DimRange, EntryRange, FaultInjection, FaultKind, Theorem, Thresholds, TrialConfig,
    MAX_DIM,
};
pub use generate::{generate_instance, generate_orthogonal_instance, GenerationError, MAX_ATTEMPTS};
pub use report::{
    emit_report, read_report, CheckSummary, Counterexample, ReportError, TheoremSummary, VerificationReport, SCHEMA,
};
pub use shrink::shrink;
pub use study::{convergence_study, ConvergenceRow, ConvergenceStudy, OracleKind, STUDY_GRIDS, STUDY_RANGE};
pub use suite::run_suite;
