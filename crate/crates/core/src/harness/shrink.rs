use nalgebra::DMatrix;

use super::checks::Checker;
use super::config::{ConfigError, Theorem};
use super::report::Counterexample;
use crate::lattice_core::LatticeVector;
use crate::sip::{Instance, PsdFamilySip, Sip};

fn remove<T: Copy>(v: &[T], k: usize) -> Vec<T> {
    v.iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, &x)| x)
        .collect()
}

fn family(mats: Vec<DMatrix<f64>>) -> Option<Sip> {
    PsdFamilySip::from_matrices_unchecked(mats).ok().map(Sip::PsdFamily)
}

fn build(sip: Sip, u: Vec<f64>, x: Vec<f64>, y: Vec<f64>) -> Option<Instance> {
    Instance::new(sip, LatticeVector::new(u).ok()?, x, y).ok()
}

/// Candidate reductions in the order they are tried: drop a codomain
/// component, drop a domain coordinate, zero a single entry.
fn candidates(inst: &Instance) -> Vec<Instance> {
    let u = inst.u.as_slice();
    let (x, y) = (&inst.x, &inst.y);
    let mut out = Vec::new();
    match &inst.sip {
        Sip::PsdFamily(s) => {
            let mats = s.matrices();
            let (m, n) = (s.domain_dim(), s.codomain_dim());
            if n > 1 {
                for j in 0..n {
                    let kept = mats
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != j)
                        .map(|(_, a)| a.clone())
                        .collect();
                    out.extend(family(kept).and_then(|sip| build(sip, remove(u, j), x.clone(), y.clone())));
                }
            }
            if m > 1 {
                for k in 0..m {
                    let kept = mats.iter().map(|a| a.clone().remove_row(k).remove_column(k)).collect();
                    out.extend(family(kept).and_then(|sip| build(sip, u.to_vec(), remove(x, k), remove(y, k))));
                }
            }
            for j in 0..n {
                for r in 0..m {
                    for c in 0..m {
                        if mats[j][(r, c)] != 0.0 {
                            let mut kept = mats.to_vec();
                            kept[j][(r, c)] = 0.0;
                            out.extend(family(kept).and_then(|sip| build(sip, u.to_vec(), x.clone(), y.clone())));
                        }
                    }
                }
            }
        }
        Sip::Multiplication(_) => {
            let n = u.len();
            if n > 1 {
                for j in 0..n {
                    if let Ok(sip) = Sip::multiplication(n - 1) {
                        out.extend(build(sip, remove(u, j), remove(x, j), remove(y, j)));
                    }
                }
            }
        }
    }
    for k in 0..x.len() {
        if x[k] != 0.0 {
            let mut x2 = x.clone();
            x2[k] = 0.0;
            out.extend(build(inst.sip.clone(), u.to_vec(), x2, y.clone()));
        }
        if y[k] != 0.0 {
            let mut y2 = y.clone();
            y2[k] = 0.0;
            out.extend(build(inst.sip.clone(), u.to_vec(), x.clone(), y2));
        }
    }
    for j in 0..u.len() {
        if u[j] != 0.0 {
            let mut u2 = u.to_vec();
            u2[j] = 0.0;
            out.extend(build(inst.sip.clone(), u2, x.clone(), y.clone()));
        }
    }
    out
}

fn fails(checker: &Checker, theorem: Theorem, check: &str, inst: &Instance) -> bool {
    checker
        .run(theorem, inst)
        .get(check)
        .is_some_and(|s| s.failed())
}

/// Greedily applies reductions while the named check keeps failing. The
/// result is a fixed point: no single further reduction still fails.
///
/// If the stored instance does not fail its check it is returned unchanged.
pub fn shrink(cex: &Counterexample) -> Result<Counterexample, ConfigError> {
    let checker = Checker::new(cex.settings)?;
    let (theorem, check) = (cex.theorem, cex.check.as_str());
    let mut current = cex.instance.clone();
    if !fails(&checker, theorem, check, &current) {
        return Ok(cex.clone());
    }
    'outer: loop {
        for cand in candidates(&current) {
            if fails(&checker, theorem, check, &cand) {
                current = cand;
                continue 'outer;
            }
        }
        break;
    }
    let outcome = checker.run(theorem, &current);
    let sub = outcome.get(check).expect("check still fails, so it is present");
    Ok(Counterexample {
        residual: sub.residual,
        threshold: sub.threshold,
        instance: current,
        ..cex.clone()
    })
}
