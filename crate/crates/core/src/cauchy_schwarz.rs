//! The Cauchy-Schwarz defect
//! `D(x, y) = inf_{λ≠0} |λ|⁻¹ T(λx − y, λx − y)` and the identity
//! `|T(x, y)| = T(x, x) ⊠ T(y, y) − ½·D(x, y)`.
//!
//! Componentwise, with `a = T(x,x)ⱼ`, `b = T(x,y)ⱼ`, `c = T(y,y)ⱼ`, the family
//! member at `λ` is `|λ|a − 2·sgn(λ)·b + c/|λ|`. Minimizing over each sign
//! gives `2√(ac) ∓ 2b`, so `Dⱼ = 2(√(aⱼcⱼ) − |bⱼ|)`. [`defect_grid`] samples
//! the defining family directly and is the independent check on that formula.

use serde::{Deserialize, Serialize};

use crate::lattice_core::{LatticeVector, DEFAULT_ABS_FLOOR};
use crate::lattice_means::{box_times, log_spaced, GridError, LogGridParams};
use crate::sip::{Sip, SipError};

/// Positive magnitudes `μ`; the sampled set is `{±μ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    magnitudes: Vec<f64>,
}

impl LambdaGrid {
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self, GridError> {
        Ok(Self {
            magnitudes: log_spaced(lo, hi, count)?,
        })
    }

    pub fn from_params(p: LogGridParams) -> Result<Self, GridError> {
        Self::log_spaced(p.lo, p.hi, p.count)
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn lo(&self) -> f64 {
        self.magnitudes[0]
    }

    pub fn hi(&self) -> f64 {
        self.magnitudes[self.magnitudes.len() - 1]
    }
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self::log_spaced(1e-6, 1e6, 2001).expect("default grid is valid")
    }
}

/// Closed-form defect alongside its grid estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectResult {
    pub closed: LatticeVector,
    pub grid: LatticeVector,
    /// `grid − closed`; nonnegative up to rounding.
    pub gap: LatticeVector,
}

/// The three Gram entries `(T(x,x), T(x,y), T(y,y))`.
pub(crate) fn gram(
    sip: &Sip,
    x: &[f64],
    y: &[f64],
) -> Result<(LatticeVector, LatticeVector, LatticeVector), SipError> {
    Ok((sip.quadratic(x)?, sip.eval(x, y)?, sip.quadratic(y)?))
}

/// `Dⱼ = 2(√(aⱼcⱼ) − |bⱼ|)`.
pub fn defect_closed(sip: &Sip, x: &[f64], y: &[f64]) -> Result<LatticeVector, SipError> {
    let (a, b, c) = gram(sip, x, y)?;
    Ok(defect_from_gram(&a, &b, &c))
}

pub(crate) fn defect_from_gram(a: &LatticeVector, b: &LatticeVector, c: &LatticeVector) -> LatticeVector {
    let out = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .zip(c.as_slice())
        .map(|((&a, &b), &c)| {
            let ac = (a.max(0.0) * c.max(0.0)).max(0.0);
            2.0 * (ac.sqrt() - b.abs())
        })
        .collect();
    LatticeVector::from_raw(out)
}

/// Componentwise minimum of `|λ|⁻¹T(λx − y, λx − y)` over `λ ∈ {±μ}`.
///
/// Each family member is evaluated through the semi-inner product itself, not
/// through the Gram entries.
pub fn defect_grid(
    sip: &Sip,
    x: &[f64],
    y: &[f64],
    grid: &LambdaGrid,
) -> Result<LatticeVector, SipError> {
    sip.check_domain(x)?;
    sip.check_domain(y)?;
    let mut best = vec![f64::INFINITY; sip.codomain_dim()];
    let mut w = vec![0.0; x.len()];
    let mut t = vec![0.0; sip.codomain_dim()];
    for &mu in grid.magnitudes() {
        for lambda in [mu, -mu] {
            for ((wk, xk), yk) in w.iter_mut().zip(x).zip(y) {
                *wk = lambda * xk - yk;
            }
            sip.eval_into(&w, &w, &mut t)?;
            for (b, v) in best.iter_mut().zip(&t) {
                *b = b.min(v / mu);
            }
        }
    }
    Ok(LatticeVector::new(best)?)
}

pub fn defect(sip: &Sip, x: &[f64], y: &[f64], grid: &LambdaGrid) -> Result<DefectResult, SipError> {
    let closed = defect_closed(sip, x, y)?;
    let grid = defect_grid(sip, x, y, grid)?;
    let gap = grid.sub(&closed)?;
    Ok(DefectResult { closed, grid, gap })
}

/// Components `j` for which the grid brackets the minimizer `√(cⱼ/aⱼ)`.
///
/// Only these have a grid gap that shrinks under refinement; the rest are
/// compared one-sidedly.
pub fn bracketed_components(sip: &Sip, x: &[f64], y: &[f64], grid: &LambdaGrid) -> Result<Vec<bool>, SipError> {
    let (a, _, c) = gram(sip, x, y)?;
    Ok(a.as_slice()
        .iter()
        .zip(c.as_slice())
        .map(|(&a, &c)| {
            if a <= 0.0 {
                return false;
            }
            let t = (c / a).sqrt();
            t >= grid.lo() && t <= grid.hi()
        })
        .collect())
}

/// `|T(x,y)| − (T(x,x) ⊠ T(y,y) − ½·D(x,y))`; vanishes by the identity.
pub fn cs_identity_residual(sip: &Sip, x: &[f64], y: &[f64]) -> Result<LatticeVector, SipError> {
    let (a, b, c) = gram(sip, x, y)?;
    let bound = box_times(&a, &c)?;
    let d = defect_from_gram(&a, &b, &c);
    Ok(b.abs_val().sub(&bound.sub(&d.scale(0.5))?)?)
}

/// Outcome of the inequality and equality clauses at one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsCheck {
    pub inequality_ok: bool,
    pub equality_holds: bool,
    pub defect_zero: bool,
    /// The normalized gap `‖⊠-bound − |T(x,y)|‖∞ / scale` lies within a
    /// factor of two of the tolerance, where the two equality tests cannot be
    /// told apart at float precision.
    pub borderline: bool,
}

/// Scale for relative comparisons: `‖T(x,x) ⊠ T(y,y)‖∞` plus the floor.
pub fn cs_scale(sip: &Sip, x: &[f64], y: &[f64]) -> Result<f64, SipError> {
    let (a, _, c) = gram(sip, x, y)?;
    Ok(box_times(&a, &c)?.norm_inf() + DEFAULT_ABS_FLOOR)
}

/// Evaluates the inequality `|T(x,y)| ≤ T(x,x) ⊠ T(y,y)` and the two sides of
/// the equality biconditional at relative tolerance `tol`.
pub fn cs_check(sip: &Sip, x: &[f64], y: &[f64], tol: f64) -> Result<CsCheck, SipError> {
    let (a, b, c) = gram(sip, x, y)?;
    let bound = box_times(&a, &c)?;
    let scale = bound.norm_inf() + DEFAULT_ABS_FLOOR;
    let slack = bound.sub(&b.abs_val())?;
    let d = defect_from_gram(&a, &b, &c);
    let gap = slack.norm_inf() / scale;
    Ok(CsCheck {
        inequality_ok: slack.in_positive_cone(tol * scale),
        equality_holds: gap <= tol,
        defect_zero: d.norm_inf() / scale <= tol,
        borderline: gap >= 0.5 * tol && gap <= 2.0 * tol,
    })
}
