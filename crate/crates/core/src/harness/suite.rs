use std::time::Instant;

use rayon::prelude::*;

use super::checks::{CheckOutcome, Checker, TrialStatus};
use super::config::{ConfigError, Theorem, TrialConfig};
use super::generate::{generate_instance, generate_orthogonal_instance, GenerationError};
use super::report::{CheckSummary, Counterexample, TheoremSummary, VerificationReport};
use crate::sip::Instance;

enum TrialResult {
    Checked {
        outcome: CheckOutcome,
        /// Kept only when the trial failed.
        instance: Option<Instance>,
    },
    NotGenerated,
}

fn run_trial(config: &TrialConfig, checker: &Checker, trial: usize) -> Vec<(Theorem, TrialResult)> {
    let mut general: Option<Result<Instance, GenerationError>> = None;
    let mut out = Vec::with_capacity(config.theorems.len());
    for &t in &config.theorems {
        let inst = if t == Theorem::Pythagoras {
            generate_orthogonal_instance(config, trial)
        } else {
            general
                .get_or_insert_with(|| generate_instance(config, trial))
                .clone()
        };
        let r = match inst {
            Ok(inst) => {
                let outcome = checker.run(t, &inst);
                let failed = outcome.status() == TrialStatus::Fail;
                TrialResult::Checked {
                    outcome,
                    instance: failed.then_some(inst),
                }
            }
            Err(_) => TrialResult::NotGenerated,
        };
        out.push((t, r));
    }
    out
}

fn record(summary: &mut TheoremSummary, theorem: Theorem, trial: usize, r: TrialResult, config: &TrialConfig) {
    summary.trials += 1;
    let (outcome, instance) = match r {
        TrialResult::Checked { outcome, instance } => (outcome, instance),
        TrialResult::NotGenerated => {
            summary.failures += 1;
            summary.generation_failures += 1;
            return;
        }
    };
    match outcome.status() {
        TrialStatus::Pass => summary.passes += 1,
        TrialStatus::Fail => summary.failures += 1,
        TrialStatus::Borderline => summary.borderline += 1,
    }
    for s in &outcome.subchecks {
        let c = summary.checks.entry(s.name.to_string()).or_insert(CheckSummary {
            threshold: s.threshold,
            max_residual: 0.0,
            worst_instance: None,
            failures: 0,
            borderline: 0,
        });
        if s.residual > c.max_residual {
            c.max_residual = s.residual;
            c.worst_instance = Some(trial);
        }
        c.failures += usize::from(s.failed());
        c.borderline += usize::from(s.borderline);
        if s.residual > summary.max_residual {
            summary.max_residual = s.residual;
            summary.worst_instance = Some(trial);
        }
    }
    if let (Some(f), Some(inst)) = (outcome.first_failure(), instance) {
        if summary.counterexamples.len() < config.max_counterexamples {
            summary.counterexamples.push(Counterexample {
                theorem,
                check: f.name.to_string(),
                trial: Some(trial),
                residual: f.residual,
                threshold: f.threshold,
                settings: config.checks,
                instance: inst,
            });
        }
    }
}

/// Runs every selected theorem over all trials. Trials run in parallel and are
/// folded in index order, so the report does not depend on scheduling.
pub fn run_suite(config: &TrialConfig) -> Result<VerificationReport, ConfigError> {
    config.validate()?;
    let checker = Checker::new(config.checks)?;
    let start = Instant::now();
    let mut report = VerificationReport::new(config.clone());
    if !config.theorems.is_empty() {
        let results: Vec<_> = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, &checker, t))
            .collect();
        for (trial, per_theorem) in results.into_iter().enumerate() {
            for (theorem, r) in per_theorem {
                let summary = report.theorems.entry(theorem).or_insert_with(TheoremSummary::empty);
                record(summary, theorem, trial, r, config);
            }
        }
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
