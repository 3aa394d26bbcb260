use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConfigError, TrialConfig};
use super::generate::{generate_instance, trial_rng, TAG_STUDY};
use super::report::SCHEMA;
use crate::cauchy_schwarz::{bracketed_components, defect, gram, LambdaGrid};
use crate::lattice_core::LatticeVector;
use crate::lattice_means::{box_plus, box_plus_oracle, box_times, box_times_oracle, AngleGrid, ThetaGrid};

/// Default grid sizes.
pub const STUDY_GRIDS: [usize; 3] = [100, 1000, 10_000];

/// Entries of the ⊠ and ⊞ inputs have magnitude in this range, drawn
/// log-uniformly.
pub const STUDY_RANGE: (f64, f64) = (1e-3, 1e3);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    BoxTimes,
    BoxPlus,
    Defect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub oracle: OracleKind,
    pub grid_size: usize,
    /// Largest relative gap between oracle and closed form over all trials.
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub schema: String,
    pub seed: u64,
    pub trials: usize,
    pub grids: Vec<usize>,
    pub rows: Vec<ConvergenceRow>,
    /// Gaps are non-increasing in the grid size for every oracle, up to the
    /// absolute floor.
    pub monotone: bool,
    pub wall_time_s: f64,
}

impl ConvergenceStudy {
    pub fn gap(&self, oracle: OracleKind, grid_size: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.oracle == oracle && r.grid_size == grid_size)
            .map(|r| r.max_gap)
    }

    pub fn exit_code(&self) -> i32 {
        if self.monotone {
            0
        } else {
            1
        }
    }
}

fn log_uniform(rng: &mut impl Rng, n: usize, signed: bool) -> LatticeVector {
    let (lo, hi) = (STUDY_RANGE.0.ln(), STUDY_RANGE.1.ln());
    let v = (0..n)
        .map(|_| {
            let m = rng.random_range(lo..=hi).exp();
            if signed && rng.random_bool(0.5) {
                -m
            } else {
                m
            }
        })
        .collect();
    LatticeVector::new(v).expect("finite")
}

struct Grids {
    theta: ThetaGrid,
    angles: AngleGrid,
    lambda: LambdaGrid,
}

fn trial_gaps(config: &TrialConfig, grids: &[Grids], trial: usize) -> Vec<[f64; 3]> {
    let floor = config.checks.tolerances.abs;
    let mut rng = trial_rng(config.seed, TAG_STUDY, trial);
    let n = rng.random_range(config.n.lo..=config.n.hi);
    let (p, q) = (log_uniform(&mut rng, n, false), log_uniform(&mut rng, n, false));
    let (a, b) = (log_uniform(&mut rng, n, true), log_uniform(&mut rng, n, true));
    let times = box_times(&p, &q).expect("same dims");
    let plus = box_plus(&a, &b).expect("same dims");
    let inst = generate_instance(config, trial).ok();

    grids
        .iter()
        .map(|g| {
            let est = box_times_oracle(&p, &q, &g.theta).expect("same dims");
            let tm = est
                .value
                .as_slice()
                .iter()
                .zip(times.as_slice())
                .enumerate()
                .filter(|(j, _)| !est.out_of_range.contains(j))
                .fold(0.0f64, |m, (_, (&o, &e))| m.max((o - e) / (e + floor)));
            let est = box_plus_oracle(&a, &b, &g.angles).expect("same dims");
            let pl = est
                .as_slice()
                .iter()
                .zip(plus.as_slice())
                .fold(0.0f64, |m, (&o, &e)| m.max((e - o) / (e + floor)));
            let df = inst.as_ref().map_or(0.0, |inst| {
                let (x, y) = (&inst.x, &inst.y);
                let (Ok(d), Ok((ga, _, gc)), Ok(br)) = (
                    defect(&inst.sip, x, y, &g.lambda),
                    gram(&inst.sip, x, y),
                    bracketed_components(&inst.sip, x, y, &g.lambda),
                ) else {
                    return 0.0;
                };
                let scale = box_times(&ga, &gc).map_or(0.0, |b| b.norm_inf()) + floor;
                d.gap
                    .as_slice()
                    .iter()
                    .zip(&br)
                    .filter(|(_, &b)| b)
                    .fold(0.0f64, |m, (&v, _)| m.max(v / scale))
            });
            [tm, pl, df]
        })
        .collect()
}

/// Maximum oracle gaps over `config.trials` trials for each grid size. The
/// θ and λ grids keep the configured bounds and vary only the count.
pub fn convergence_study(config: &TrialConfig, grid_sizes: &[usize]) -> Result<ConvergenceStudy, ConfigError> {
    config.validate()?;
    let start = Instant::now();
    let grid_err = |name| move |source| ConfigError::Grid { name, source };
    let (t, l) = (config.checks.theta_grid, config.checks.lambda_grid);
    let grids = grid_sizes
        .iter()
        .map(|&g| {
            Ok(Grids {
                theta: ThetaGrid::log_spaced(t.lo, t.hi, g).map_err(grid_err("theta"))?,
                angles: AngleGrid::full(g).map_err(grid_err("angle"))?,
                lambda: LambdaGrid::log_spaced(l.lo, l.hi, g).map_err(grid_err("lambda"))?,
            })
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;

    let per_trial: Vec<Vec<[f64; 3]>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| trial_gaps(config, &grids, trial))
        .collect();
    let mut max = vec![[0.0f64; 3]; grids.len()];
    for gaps in &per_trial {
        for (m, g) in max.iter_mut().zip(gaps) {
            for k in 0..3 {
                m[k] = m[k].max(g[k]);
            }
        }
    }

    let kinds = [OracleKind::BoxTimes, OracleKind::BoxPlus, OracleKind::Defect];
    let mut order: Vec<usize> = (0..grid_sizes.len()).collect();
    order.sort_by_key(|&i| grid_sizes[i]);
    let floor = config.checks.tolerances.abs;
    let monotone = (0..3).all(|k| order.windows(2).all(|w| max[w[1]][k] <= max[w[0]][k] + floor));

    let mut rows = Vec::new();
    for (k, &oracle) in kinds.iter().enumerate() {
        for &i in &order {
            rows.push(ConvergenceRow {
                oracle,
                grid_size: grid_sizes[i],
                max_gap: max[i][k],
            });
        }
    }
    Ok(ConvergenceStudy {
        schema: SCHEMA.to_string(),
        seed: config.seed,
        trials: config.trials,
        grids: order.iter().map(|&i| grid_sizes[i]).collect(),
        rows,
        monotone,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
