use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::config::{DimRange, FaultInjection, FaultKind, TrialConfig, MAX_DIM};
use crate::lattice_core::LatticeVector;
use crate::sip::{make_psd_sip_with_rank, orthogonal_sample, uniform_vec, Instance, Sip, SipError};

/// Attempts made for an orthogonal pair before giving up.
pub const MAX_ATTEMPTS: usize = 100;

const TAG_GENERAL: u64 = 1;
const TAG_ORTHOGONAL: u64 = 2;
pub(crate) const TAG_STUDY: u64 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerationError {
    #[error("no orthogonal pair found for trial {trial} after {attempts} attempts")]
    Exhausted { trial: usize, attempts: usize },
    #[error(transparent)]
    Sip(#[from] SipError),
}

/// Independent stream per `(seed, tag, trial)`; the result does not depend on
/// the order in which trials are generated.
pub(crate) fn trial_rng(seed: u64, tag: u64, trial: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial as u64);
    rng
}

fn draw_dim(rng: &mut ChaCha8Rng, r: DimRange) -> usize {
    rng.random_range(r.lo..=r.hi)
}

fn draw_psd(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Result<Sip, SipError> {
    let rank = if rng.random_bool(0.5) { m } else { rng.random_range(1..=m) };
    Ok(make_psd_sip_with_rank(m, n, rank, rng)?.into())
}

fn draw_weight(rng: &mut ChaCha8Rng, n: usize, hi: f64) -> LatticeVector {
    let mut u = uniform_vec(rng, n, 0.0, hi);
    let r: f64 = rng.random();
    if r < 0.05 {
        u.iter_mut().for_each(|v| *v = 0.0);
    } else if r < 0.2 {
        for v in u.iter_mut() {
            if rng.random_bool(0.5) {
                *v = 0.0;
            }
        }
    }
    LatticeVector::new(u).expect("weights are finite")
}

fn inject(sip: &mut Sip, kind: FaultKind) {
    let Sip::PsdFamily(s) = sip else { return };
    let a = &mut s.matrices_mut()[0];
    let m = a.nrows();
    match kind {
        FaultKind::Asymmetric => a[(0, 1)] += 1.0,
        FaultKind::Negative => *a = -DMatrix::identity(m, m),
    }
}

fn faulted(fault: Option<FaultInjection>, trial: usize) -> Option<FaultKind> {
    fault.filter(|f| trial.is_multiple_of(f.every)).map(|f| f.kind)
}

/// The general instance for `trial`: a PSD family with random rank (70%) or
/// a multiplication sip (30%), and a pair `(x, y)` that is sometimes colinear,
/// zero, or sign-aligned.
pub fn generate_instance(config: &TrialConfig, trial: usize) -> Result<Instance, GenerationError> {
    let mut rng = trial_rng(config.seed, TAG_GENERAL, trial);
    let (lo, hi) = (config.entry_range.lo, config.entry_range.hi);
    let fault = faulted(config.fault, trial);
    let multiplication = fault.is_none() && rng.random_bool(0.3);
    let n = draw_dim(&mut rng, config.n);
    let mut sip = if multiplication {
        Sip::multiplication(n)?
    } else {
        let mut m = draw_dim(&mut rng, config.m);
        if fault == Some(FaultKind::Asymmetric) {
            m = m.max(2);
        }
        draw_psd(&mut rng, m, n)?
    };
    if let Some(kind) = fault {
        inject(&mut sip, kind);
    }
    let m = sip.domain_dim();
    let x = uniform_vec(&mut rng, m, lo, hi);
    let r: f64 = rng.random();
    let y = if r < 0.15 {
        let alpha = rng.random_range(-3.0..=3.0);
        x.iter().map(|v| alpha * v).collect()
    } else if r < 0.2 {
        vec![0.0; m]
    } else if r < 0.3 && multiplication {
        x.iter().map(|v| v.signum() * rng.random_range(0.0..=hi)).collect()
    } else {
        uniform_vec(&mut rng, m, lo, hi)
    };
    let u = draw_weight(&mut rng, n, hi);
    Ok(Instance::new(sip, u, x, y).expect("generated instance is consistent"))
}

/// An instance with `T(x, y) ≈ 0` for the Pythagorean suite. PSD families use
/// `m > n` so a nontrivial orthogonal vector exists generically; a
/// multiplication sip gets an `x` with some zero entries.
pub fn generate_orthogonal_instance(config: &TrialConfig, trial: usize) -> Result<Instance, GenerationError> {
    let mut rng = trial_rng(config.seed, TAG_ORTHOGONAL, trial);
    let (lo, hi) = (config.entry_range.lo, config.entry_range.hi);
    for _ in 0..MAX_ATTEMPTS {
        let n = draw_dim(&mut rng, config.n).min(MAX_DIM - 1);
        let (sip, x) = if n >= 2 && rng.random_bool(0.3) {
            let mut x = uniform_vec(&mut rng, n, lo, hi);
            let zeros = rng.random_range(1..n);
            for _ in 0..zeros {
                let k = rng.random_range(0..n);
                x[k] = 0.0;
            }
            (Sip::multiplication(n)?, x)
        } else {
            let m_lo = config.m.lo.max(n + 1);
            let m_hi = config.m.hi.max(n + 1).min(MAX_DIM);
            let m = rng.random_range(m_lo..=m_hi);
            (draw_psd(&mut rng, m, n)?, uniform_vec(&mut rng, m, lo, hi))
        };
        let seed: u64 = rng.random();
        let y = match orthogonal_sample(&sip, &x, seed) {
            Ok(y) => y,
            Err(SipError::NoNontrivialOrthogonal | SipError::ZeroVector) => continue,
            Err(e) => return Err(e.into()),
        };
        let u = draw_weight(&mut rng, n, hi);
        return Ok(Instance::new(sip, u, x, y).expect("generated instance is consistent"));
    }
    Err(GenerationError::Exhausted {
        trial,
        attempts: MAX_ATTEMPTS,
    })
}
