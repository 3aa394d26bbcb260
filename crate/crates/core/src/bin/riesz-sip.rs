use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riesz_sip::harness::{
    convergence_study, emit_report, run_suite, shrink, CheckSettings, Counterexample, DimRange, FaultInjection,
    FaultKind, Theorem, TrialConfig, VerificationReport, STUDY_GRIDS,
};
use riesz_sip::Instance;

const SEED_ENV: &str = "RIESZ_SIP_SEED";

#[derive(Parser)]
#[command(name = "riesz-sip", version, about = "Randomized verification of vector semi-inner products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run theorem suites over generated instances.
    Verify(VerifyArgs),
    /// Measure oracle gaps against closed forms for several grid sizes.
    OracleStudy(StudyArgs),
    /// Reduce a failing instance while its check keeps failing.
    Shrink(ShrinkArgs),
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    theta_lo: Option<f64>,
    #[arg(long)]
    theta_hi: Option<f64>,
    #[arg(long)]
    theta_count: Option<usize>,
    #[arg(long)]
    angle_count: Option<usize>,
    #[arg(long)]
    lambda_lo: Option<f64>,
    #[arg(long)]
    lambda_hi: Option<f64>,
    #[arg(long)]
    lambda_count: Option<usize>,
}

impl GridArgs {
    fn apply(&self, c: &mut CheckSettings) {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut c.theta_grid.lo, self.theta_lo);
        set(&mut c.theta_grid.hi, self.theta_hi);
        set(&mut c.lambda_grid.lo, self.lambda_lo);
        set(&mut c.lambda_grid.hi, self.lambda_hi);
        if let Some(v) = self.theta_count {
            c.theta_grid.count = v;
        }
        if let Some(v) = self.lambda_count {
            c.lambda_grid.count = v;
        }
        if let Some(v) = self.angle_count {
            c.angle_grid = v;
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// `all` or a comma-separated subset of
    /// axioms,cs,prop23,vsn,sharp,additivity,pythagoras,parallelogram,oracle.
    #[arg(long)]
    theorems: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Domain dimension: `4` or an inclusive range `2..8`.
    #[arg(long)]
    m: Option<DimRange>,
    /// Codomain dimension: `4` or an inclusive range `1..4`.
    #[arg(long)]
    n: Option<DimRange>,
    #[arg(long)]
    tol_rel: Option<f64>,
    #[arg(long)]
    tol_abs: Option<f64>,
    #[arg(long)]
    cone_band: Option<f64>,
    #[command(flatten)]
    grids: GridArgs,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write each recorded counterexample as a JSON file into this directory.
    #[arg(long)]
    instances: Option<PathBuf>,
    /// Start from a JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corrupt generated instances: asymmetric or negative.
    #[arg(long)]
    inject: Option<FaultKind>,
    /// Corrupt trials whose index is a multiple of this.
    #[arg(long, default_value_t = 1)]
    inject_every: usize,
    #[arg(long)]
    max_counterexamples: Option<usize>,
}

#[derive(Args)]
struct StudyArgs {
    /// Comma-separated grid sizes.
    #[arg(long, value_delimiter = ',')]
    grids: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<DimRange>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ShrinkArgs {
    /// A counterexample file, or a bare instance file together with --theorem.
    #[arg(long)]
    instance: PathBuf,
    /// Sub-check name, optionally qualified as `theorem.check`.
    #[arg(long)]
    check: String,
    #[arg(long)]
    theorem: Option<Theorem>,
    /// Write the shrunk counterexample here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("riesz-sip: {msg}");
    ExitCode::from(2)
}

fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{SEED_ENV}={s} is not a 64-bit unsigned integer")),
        Err(_) => Ok(None),
    }
}

fn build_config(a: &VerifyArgs) -> Result<TrialConfig, String> {
    let mut c = match &a.config {
        Some(p) => {
            let s = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            serde_json::from_str(&s).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => TrialConfig::default(),
    };
    if let Some(t) = &a.theorems {
        c.theorems = Theorem::parse_list(t).map_err(|e| e.to_string())?;
    }
    if let Some(v) = a.trials {
        c.trials = v;
    }
    if let Some(v) = a.seed {
        c.seed = v;
    }
    if let Some(v) = env_seed()? {
        c.seed = v;
    }
    if let Some(v) = a.m {
        c.m = v;
    }
    if let Some(v) = a.n {
        c.n = v;
    }
    if let Some(v) = a.tol_rel {
        c.checks.tolerances.rel = v;
    }
    if let Some(v) = a.tol_abs {
        c.checks.tolerances.abs = v;
    }
    if let Some(v) = a.cone_band {
        c.checks.tolerances.cone_band = v;
    }
    if let Some(v) = a.max_counterexamples {
        c.max_counterexamples = v;
    }
    if let Some(kind) = a.inject {
        c.fault = Some(FaultInjection {
            kind,
            every: a.inject_every,
        });
    }
    a.grids.apply(&mut c.checks);
    c.validate().map_err(|e| e.to_string())?;
    Ok(c)
}

fn print_summary(r: &VerificationReport) {
    println!(
        "{:<14} {:>7} {:>7} {:>8} {:>10} {:>12}",
        "theorem", "trials", "passes", "failures", "borderline", "max_residual"
    );
    for (t, s) in &r.theorems {
        println!(
            "{:<14} {:>7} {:>7} {:>8} {:>10} {:>12.3e}",
            t.name(),
            s.trials,
            s.passes,
            s.failures,
            s.borderline,
            s.max_residual
        );
        for c in &s.counterexamples {
            println!("  counterexample: trial {:?} check {} residual {:e}", c.trial, c.check, c.residual);
        }
    }
    println!("wall time {:.2} s", r.wall_time_s);
}

fn write_instances(dir: &Path, r: &VerificationReport) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for c in r.counterexamples() {
        let name = format!("{}-{}-{}.json", c.theorem, c.trial.unwrap_or(0), c.check);
        fs::write(dir.join(name), serde_json::to_string_pretty(c)? + "\n")?;
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> ExitCode {
    let config = match build_config(&a) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let report = match run_suite(&config) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    print_summary(&report);
    if let Some(p) = &a.report {
        if let Err(e) = emit_report(&report, p) {
            return fail(format!("{}: {e}", p.display()));
        }
    }
    if let Some(d) = &a.instances {
        if let Err(e) = write_instances(d, &report) {
            return fail(format!("{}: {e}", d.display()));
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn oracle_study(a: StudyArgs) -> ExitCode {
    let mut config = TrialConfig {
        trials: a.trials,
        ..TrialConfig::default()
    };
    if let Some(v) = a.seed {
        config.seed = v;
    }
    match env_seed() {
        Ok(Some(v)) => config.seed = v,
        Ok(None) => {}
        Err(e) => return fail(e),
    }
    if let Some(v) = a.n {
        config.n = v;
    }
    let grids = a.grids.unwrap_or_else(|| STUDY_GRIDS.to_vec());
    let study = match convergence_study(&config, &grids) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    println!("{:<10} {:>9} {:>12}", "oracle", "grid", "max_gap");
    for r in &study.rows {
        let name = serde_json::to_value(r.oracle).ok().and_then(|v| v.as_str().map(String::from));
        println!("{:<10} {:>9} {:>12.3e}", name.unwrap_or_default(), r.grid_size, r.max_gap);
    }
    println!("monotone: {}", study.monotone);
    if let Some(p) = &a.report {
        let s = serde_json::to_string_pretty(&study).expect("study serializes") + "\n";
        if let Err(e) = fs::write(p, s) {
            return fail(format!("{}: {e}", p.display()));
        }
    }
    ExitCode::from(study.exit_code() as u8)
}

fn load_case(a: &ShrinkArgs) -> Result<Counterexample, String> {
    let s = fs::read_to_string(&a.instance).map_err(|e| format!("{}: {e}", a.instance.display()))?;
    let (theorem, check) = match a.check.split_once('.') {
        Some((t, c)) => (Some(t.parse::<Theorem>().map_err(|e| e.to_string())?), c.to_string()),
        None => (a.theorem, a.check.clone()),
    };
    if let Ok(mut cex) = serde_json::from_str::<Counterexample>(&s) {
        if let Some(t) = theorem {
            cex.theorem = t;
        }
        cex.check = check;
        return Ok(cex);
    }
    let instance: Instance = serde_json::from_str(&s).map_err(|e| format!("{}: {e}", a.instance.display()))?;
    let theorem = theorem.ok_or("a bare instance needs --theorem or a qualified --check")?;
    Ok(Counterexample {
        theorem,
        check,
        trial: None,
        residual: 0.0,
        threshold: 0.0,
        settings: CheckSettings::default(),
        instance,
    })
}

fn shrink_cmd(a: ShrinkArgs) -> ExitCode {
    let cex = match load_case(&a) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    match cex.fails() {
        Ok(true) => {}
        Ok(false) => return fail(format!("instance does not fail {}.{}", cex.theorem, cex.check)),
        Err(e) => return fail(e),
    }
    let shrunk = match shrink(&cex) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let json = serde_json::to_string_pretty(&shrunk).expect("counterexample serializes") + "\n";
    match &a.out {
        Some(p) => {
            if let Err(e) = fs::write(p, json) {
                return fail(format!("{}: {e}", p.display()));
            }
        }
        None => print!("{json}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Verify(a) => verify(a),
        Command::OracleStudy(a) => oracle_study(a),
        Command::Shrink(a) => shrink_cmd(a),
    }
}
