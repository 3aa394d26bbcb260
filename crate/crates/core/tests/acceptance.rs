//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;

use riesz_sip::cauchy_schwarz::{cs_check, defect, LambdaGrid};
use riesz_sip::harness::{
    convergence_study, generate_instance, run_suite, Counterexample, DimRange, FaultInjection, FaultKind, OracleKind, Theorem,
    TrialConfig, VerificationReport,
};
use riesz_sip::seminorms::{DecisionTolerance, SeminormSpec};
use riesz_sip::{LatticeVector, Sip};

const TRIALS: usize = 10_000;

struct Criterion {
    lines: Vec<String>,
    ok: bool,
}

impl Criterion {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            ok: true,
        }
    }

    fn require(&mut self, ok: bool, what: String) {
        if !ok {
            self.ok = false;
        }
        self.lines.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
    }

    /// The per-check maximum over the suite is at most `limit`, with no
    /// failures recorded for it.
    fn check_max(&mut self, r: &VerificationReport, t: Theorem, check: &str, limit: f64) {
        match r.theorems.get(&t).and_then(|s| s.check(check)) {
            Some(c) => self.require(
                c.max_residual <= limit && c.failures == 0,
                format!("{t}.{check}: max {:.3e} <= {limit:e}, failures {}", c.max_residual, c.failures),
            ),
            None => self.require(false, format!("{t}.{check}: missing from report")),
        }
    }

    fn check_trials(&mut self, r: &VerificationReport, t: Theorem) {
        match r.theorems.get(&t) {
            Some(s) => self.require(
                s.trials == TRIALS && s.failures == 0 && s.passes + s.borderline == s.trials,
                format!(
                    "{t}: trials {} passes {} borderline {} failures {}",
                    s.trials, s.passes, s.borderline, s.failures
                ),
            ),
            None => self.require(false, format!("{t}: missing from report")),
        }
    }
}

fn lv(v: &[f64]) -> LatticeVector {
    LatticeVector::new(v.to_vec()).unwrap()
}

fn close(a: &LatticeVector, b: &[f64], tol: f64) -> bool {
    a.as_slice().len() == b.len() && a.as_slice().iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn fault_run(kind: FaultKind) -> VerificationReport {
    let config = TrialConfig {
        trials: 200,
        m: DimRange::exact(8),
        n: DimRange::exact(3),
        theorems: vec![Theorem::Axioms],
        fault: Some(FaultInjection { kind, every: 1 }),
        ..TrialConfig::default()
    };
    run_suite(&config).expect("valid config")
}

fn criterion_1(r: &VerificationReport) -> Criterion {
    let mut c = Criterion::new();
    c.check_trials(r, Theorem::Axioms);
    for check in ["additivity_left", "additivity_right", "homogeneity", "symmetry", "positivity"] {
        c.check_max(r, Theorem::Axioms, check, 1e-9);
    }
    let config = TrialConfig::default();
    let (mut psd, mut mult) = (0, 0);
    for t in 0..TRIALS {
        match generate_instance(&config, t).unwrap().sip {
            Sip::PsdFamily(_) => psd += 1,
            Sip::Multiplication(_) => mult += 1,
        }
    }
    c.require(psd > 0 && mult > 0, format!("instance mix: {psd} PSD families, {mult} multiplication sips"));
    for (kind, check) in [(FaultKind::Asymmetric, "symmetry"), (FaultKind::Negative, "positivity")] {
        let f = fault_run(kind);
        let s = &f.theorems[&Theorem::Axioms];
        let caught = s.failures == s.trials && s.counterexamples.iter().all(|x| x.check == check);
        c.require(
            caught && !s.counterexamples.is_empty(),
            format!("{kind:?} witness caught: {} of {} trials fail {check}", s.failures, s.trials),
        );
    }
    c
}

fn criterion_2(r: &VerificationReport) -> Criterion {
    let mut c = Criterion::new();
    c.check_trials(r, Theorem::Cs);
    c.check_max(r, Theorem::Cs, "identity", 1e-8);
    c.check_max(r, Theorem::Cs, "inequality", 1e-10);
    c.check_max(r, Theorem::Cs, "defect_nonnegative", 1e-10);
    c.check_max(r, Theorem::Cs, "equality_iff", 0.0);
    let config = TrialConfig::default();
    let (mut eq, mut strict) = (0, 0);
    for t in 0..TRIALS {
        let inst = generate_instance(&config, t).unwrap();
        let k = cs_check(&inst.sip, &inst.x, &inst.y, 1e-9).unwrap();
        if !k.borderline {
            if k.equality_holds {
                eq += 1;
            } else {
                strict += 1;
            }
        }
    }
    c.require(eq > 0 && strict > 0, format!("both sides exercised: {eq} equality, {strict} strict"));
    c
}

fn criterion_3(r: &VerificationReport) -> Criterion {
    let mut c = Criterion::new();
    c.check_trials(r, Theorem::Oracle);
    c.check_max(r, Theorem::Oracle, "defect_sandwich", 1e-10);
    c.check_max(r, Theorem::Oracle, "defect_gap", 1e-4);
    c.check_max(r, Theorem::Sharp, "weighted_defect_sandwich", 1e-10);
    c.check_max(r, Theorem::Sharp, "weighted_defect_gap", 1e-4);
    let grid = LambdaGrid::log_spaced(1e-6, 1e6, 2001).unwrap();
    let d = defect(&Sip::dot(2), &[1.0, 0.0], &[0.0, 1.0], &grid).unwrap();
    c.require(
        close(&d.grid, &[2.0], 1e-6) && close(&d.closed, &[2.0], 1e-6),
        format!("dot sip orthonormal pair: grid {:.9}, closed {:.9}", d.grid[0], d.closed[0]),
    );
    c
}

fn criterion_4(r: &VerificationReport) -> Criterion {
    let mut c = Criterion::new();
    c.check_max(r, Theorem::Oracle, "box_times_sandwich", 1e-12);
    c.check_max(r, Theorem::Oracle, "box_plus_sandwich", 1e-12);
    c.check_max(r, Theorem::Oracle, "box_times_gap", 1e-3);
    c.check_max(r, Theorem::Oracle, "box_plus_gap", 1e-5);
    c.check_max(r, Theorem::Oracle, "quarter_circle", 1e-12);
    c.check_trials(r, Theorem::Prop23);
    for check in ["biadditivity_left", "biadditivity_right", "homogeneity_left", "homogeneity_right"] {
        c.check_max(r, Theorem::Prop23, check, 1e-10);
    }
    let config = TrialConfig {
        trials: 500,
        ..TrialConfig::default()
    };
    let study = convergence_study(&config, &[100, 1000, 4096, 10_000]).unwrap();
    let tm = study.gap(OracleKind::BoxTimes, 10_000).unwrap();
    let pl = study.gap(OracleKind::BoxPlus, 4096).unwrap();
    c.require(tm <= 1e-3, format!("study: box_times gap at 10^4 points {tm:.3e} <= 1e-3"));
    c.require(pl <= 1e-5, format!("study: box_plus gap at 4096 angles {pl:.3e} <= 1e-5"));
    c.require(study.monotone, format!("study: gaps non-increasing in grid size: {}", study.monotone));
    c
}

fn criterion_5(r: &VerificationReport) -> Criterion {
    let mut c = Criterion::new();
    c.check_trials(r, Theorem::Vsn);
    for check in ["positivity", "absolute_homogeneity", "triangle"] {
        c.check_max(r, Theorem::Vsn, check, 1e-9);
    }
    c.check_max(r, Theorem::Vsn, "square_identity", 1e-10);
    c
}

fn criterion_6(r: &VerificationReport) -> Criterion {
    let mut c = Criterion::new();
    c.check_trials(r, Theorem::Sharp);
    c.check_max(r, Theorem::Sharp, "chain_lower", 1e-10);
    c.check_max(r, Theorem::Sharp, "chain_upper", 1e-10);
    c.check_max(r, Theorem::Sharp, "sqrt_chain", 1e-9);
    c.check_max(r, Theorem::Sharp, "equality_iff", 0.0);

    let tol = DecisionTolerance::default();
    let mul = |u: &[f64]| SeminormSpec::new(Sip::multiplication(u.len()).unwrap(), lv(u)).unwrap();
    let cases: [(SeminormSpec, Vec<f64>, Vec<f64>, [Vec<f64>; 2], bool); 3] = [
        (mul(&[1.0, 1.0]), vec![1.0, 2.0], vec![2.0, 1.0], [vec![9.0, 9.0], vec![9.0, 9.0]], true),
        (mul(&[1.0, 1.0]), vec![1.0, 1.0], vec![-1.0, 1.0], [vec![0.0, 4.0], vec![4.0, 4.0]], false),
        (
            SeminormSpec::new(Sip::dot(2), lv(&[1.0])).unwrap(),
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            [vec![2.0], vec![2.0]],
            true,
        ),
    ];
    for (i, (spec, x, y, [lhs, middle], equality)) in cases.iter().enumerate() {
        let st = spec.sharpened_triangle(x, y, &tol).unwrap();
        let ok = close(&st.lhs_sq, lhs, 1e-10)
            && close(&st.middle, middle, 1e-10)
            && st.equality_holds == *equality
            && st.condition_holds == *equality
            && st.chain_ok;
        c.require(
            ok,
            format!(
                "worked example {}: lhs_sq {:?} middle {:?} equality {}",
                i + 1,
                st.lhs_sq.as_slice(),
                st.middle.as_slice(),
                st.equality_holds
            ),
        );
    }

    let config = TrialConfig::default();
    let (mut eq, mut strict) = (0, 0);
    for t in 0..TRIALS {
        let inst = generate_instance(&config, t).unwrap();
        let spec = SeminormSpec::new(inst.sip, inst.u).unwrap();
        let st = spec.sharpened_triangle(&inst.x, &inst.y, &tol).unwrap();
        if !st.borderline {
            if st.equality_holds {
                eq += 1;
            } else {
                strict += 1;
            }
        }
    }
    c.require(eq > 0 && strict > 0, format!("both sides exercised: {eq} equality, {strict} strict"));
    c
}

fn criterion_7(r: &VerificationReport) -> Criterion {
    let mut c = Criterion::new();
    c.check_trials(r, Theorem::Additivity);
    c.check_max(r, Theorem::Additivity, "additivity_iff", 0.0);
    let config = TrialConfig::default();
    let tol = DecisionTolerance::default();
    let (mut additive, mut not) = (0, 0);
    for t in 0..TRIALS {
        let inst = generate_instance(&config, t).unwrap();
        let spec = SeminormSpec::new(inst.sip, inst.u).unwrap();
        let a = spec.additivity_check(&inst.x, &inst.y, &tol).unwrap();
        if !a.borderline {
            if a.additive {
                additive += 1;
            } else {
                not += 1;
            }
        }
    }
    c.require(
        additive > 0 && not > 0,
        format!("both sides exercised: {additive} additive, {not} not additive"),
    );
    c
}

fn criterion_8(r: &VerificationReport) -> Criterion {
    let mut c = Criterion::new();
    c.check_trials(r, Theorem::Pythagoras);
    c.check_max(r, Theorem::Pythagoras, "precondition", 1e-10);
    c.check_max(r, Theorem::Pythagoras, "residual", 1e-9);
    c.require(
        r.theorems[&Theorem::Pythagoras].generation_failures == 0,
        "no orthogonal-pair generation failures".into(),
    );
    c
}

fn criterion_9(r: &VerificationReport) -> Criterion {
    let mut c = Criterion::new();
    c.check_trials(r, Theorem::Parallelogram);
    c.check_max(r, Theorem::Parallelogram, "residual", 1e-9);
    c
}

fn criterion_10() -> Criterion {
    let mut c = Criterion::new();
    let config = TrialConfig {
        trials: 1000,
        ..TrialConfig::default()
    };
    let a = run_suite(&config).unwrap().without_wall_time();
    let b = run_suite(&config).unwrap().without_wall_time();
    let (ja, jb) = (a.to_json().unwrap(), b.to_json().unwrap());
    c.require(ja == jb, format!("two runs of {} trials give identical reports ({} bytes)", config.trials, ja.len()));

    let mut worst: f64 = 0.0;
    let mut count = 0;
    for kind in [FaultKind::Asymmetric, FaultKind::Negative] {
        let r = fault_run(kind);
        for cex in r.counterexamples() {
            let s = serde_json::to_string(cex).unwrap();
            let back: Counterexample = serde_json::from_str(&s).unwrap();
            let replayed = back.replay().unwrap();
            worst = worst.max((replayed - cex.residual).abs());
            count += 1;
        }
    }
    c.require(
        count > 0 && worst <= 1e-12,
        format!("{count} fault counterexamples replay from JSON, max deviation {worst:e}"),
    );
    c
}

fn main() -> ExitCode {
    let config = TrialConfig::default();
    assert_eq!(config.trials, TRIALS);
    let report = run_suite(&config).expect("default config is valid");
    println!("full suite: {TRIALS} trials, all theorems, {:.2} s", report.wall_time_s);

    let criteria: [(&str, Box<dyn Fn() -> Criterion>); 10] = [
        ("sip axiom suite", Box::new(|| criterion_1(&report))),
        ("Cauchy-Schwarz identity, inequality, equality", Box::new(|| criterion_2(&report))),
        ("defect closed form vs lambda-grid oracle", Box::new(|| criterion_3(&report))),
        ("geometric and square mean oracles, biadditivity, homogeneity", Box::new(|| criterion_4(&report))),
        ("seminorm axioms and square identity", Box::new(|| criterion_5(&report))),
        ("sharpened triangle inequality", Box::new(|| criterion_6(&report))),
        ("additivity characterization", Box::new(|| criterion_7(&report))),
        ("Pythagorean theorem", Box::new(|| criterion_8(&report))),
        ("parallelogram law", Box::new(|| criterion_9(&report))),
        ("determinism and replay", Box::new(criterion_10)),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let c = run();
        println!("criterion {:>2} {}: {name}", i + 1, if c.ok { "PASS" } else { "FAIL" });
        for l in &c.lines {
            println!("    {l}");
        }
        all &= c.ok;
    }
    if all {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
