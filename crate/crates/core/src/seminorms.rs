//! Vector seminorms `‖x‖ᵀᵤ = T(x, x) ⊠ u` and the results built on them: the
//! seminorm axioms, the sharpened triangle inequality with its equality
//! condition, the additivity characterization, the Pythagorean theorem and
//! the parallelogram law.
//!
//! On the componentwise carrier the f-algebra square identity
//! `(‖x‖ᵀᵤ)² = T(x, x)·u` holds, and because multiplication by a fixed
//! `u ≥ 0` commutes with pointwise infima the u-weighted defect
//! `inf_λ |λ|⁻¹(‖λx − y‖ᵀᵤ)²` equals `D(x, y)·u`.

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cauchy_schwarz::{defect_from_gram, gram, LambdaGrid};
use crate::lattice_core::{LatticeError, LatticeVector, DEFAULT_ABS_FLOOR};
use crate::lattice_means::{box_plus, box_times};
use crate::sip::{uniform_vec, Axiom, AxiomReport, AxiomResidual, Sip, SipError, ORTHOGONALITY_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeminormError {
    #[error(transparent)]
    Sip(#[from] SipError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("weight has dimension {weight}, codomain is {codomain}")]
    WeightDimension { weight: usize, codomain: usize },
    #[error("precondition violated: ‖T(x, y)‖∞ = {0:e} exceeds the orthogonality tolerance")]
    PreconditionViolated(f64),
}

/// The pair `(T, u)` defining `‖·‖ᵀᵤ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormSpec {
    sip: Sip,
    u: LatticeVector,
}

fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

impl SeminormSpec {
    pub fn new(sip: Sip, u: LatticeVector) -> Result<Self, SeminormError> {
        if u.dim() != sip.codomain_dim() {
            return Err(SeminormError::WeightDimension {
                weight: u.dim(),
                codomain: sip.codomain_dim(),
            });
        }
        if let Some((index, &value)) = u.as_slice().iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(LatticeError::NotPositive { index, value }.into());
        }
        Ok(Self { sip, u })
    }

    pub fn sip(&self) -> &Sip {
        &self.sip
    }

    pub fn weight(&self) -> &LatticeVector {
        &self.u
    }

    /// `‖x‖ᵀᵤ = T(x, x) ⊠ u`.
    pub fn eval(&self, x: &[f64]) -> Result<LatticeVector, SeminormError> {
        Ok(box_times(&self.sip.quadratic(x)?, &self.u)?)
    }

    /// `T(x, x)·u`, the square of [`SeminormSpec::eval`].
    pub fn eval_sq(&self, x: &[f64]) -> Result<LatticeVector, SeminormError> {
        Ok(self.sip.quadratic(x)?.f_mul(&self.u)?)
    }

    /// `‖x‖ + ‖y‖ − ‖x + y‖`; in the positive cone by the triangle inequality.
    pub fn triangle_residual(&self, x: &[f64], y: &[f64]) -> Result<LatticeVector, SeminormError> {
        self.sip.check_domain(x)?;
        self.sip.check_domain(y)?;
        Ok(self.eval(x)?.add(&self.eval(y)?)?.sub(&self.eval(&add(x, y))?)?)
    }

    /// `D(x, y)·u`, the u-weighted defect.
    pub fn weighted_defect(&self, x: &[f64], y: &[f64]) -> Result<LatticeVector, SeminormError> {
        let (a, b, c) = gram(&self.sip, x, y)?;
        Ok(defect_from_gram(&a, &b, &c).f_mul(&self.u)?)
    }

    /// Grid realization of `inf_λ |λ|⁻¹(‖λx − y‖ᵀᵤ)²` through the seminorm itself.
    pub fn weighted_defect_grid(
        &self,
        x: &[f64],
        y: &[f64],
        grid: &LambdaGrid,
    ) -> Result<LatticeVector, SeminormError> {
        self.sip.check_domain(x)?;
        self.sip.check_domain(y)?;
        // (‖w‖ᵀᵤ)² = T(w, w)·u, evaluated without the intermediate allocations
        let mut best = vec![f64::INFINITY; self.u.dim()];
        let mut w = vec![0.0; x.len()];
        let mut t = vec![0.0; self.u.dim()];
        for &mu in grid.magnitudes() {
            for lambda in [mu, -mu] {
                for ((wk, xk), yk) in w.iter_mut().zip(x).zip(y) {
                    *wk = lambda * xk - yk;
                }
                self.sip.eval_into(&w, &w, &mut t)?;
                for ((b, v), u) in best.iter_mut().zip(&t).zip(self.u.as_slice()) {
                    *b = b.min(v.max(0.0) * u / mu);
                }
            }
        }
        Ok(LatticeVector::new(best)?)
    }

    /// Evaluates the squared chain
    /// `‖x+y‖² ≤ (‖x‖+‖y‖)² − D·u ≤ (‖x‖+‖y‖)²` and its equality clause.
    pub fn sharpened_triangle(
        &self,
        x: &[f64],
        y: &[f64],
        tol: &DecisionTolerance,
    ) -> Result<SharpenedTriangle, SeminormError> {
        let sum_norms = self.eval(x)?.add(&self.eval(y)?)?;
        let lhs_sq = self.eval_sq(&add(x, y))?;
        let rhs_sq = sum_norms.f_mul(&sum_norms)?;
        let middle = rhs_sq.sub(&self.weighted_defect(x, y)?)?;
        let scale = rhs_sq.norm_inf().max(lhs_sq.norm_inf()) + DEFAULT_ABS_FLOOR;
        let slack = tol.rel * scale;
        let chain_ok = lhs_sq.le_within(&middle, slack)? && middle.le_within(&rhs_sq, slack)?;

        let sum_abs = sum_norms.norm_inf() + DEFAULT_ABS_FLOOR;
        let sqrt_middle = middle.map(|v| v.max(0.0).sqrt());
        let sqrt_chain_ok = self.eval(&add(x, y))?.le_within(&sqrt_middle, tol.rel * sum_abs)?
            && sqrt_middle.le_within(&sum_norms, tol.rel * sum_abs)?;

        let equality_holds = lhs_sq.sub(&middle)?.norm_inf() <= slack;
        let cone = classify_cone(&self.sip.eval(x, y)?.f_mul(&self.u)?, scale, tol);
        Ok(SharpenedTriangle {
            lhs_sq,
            middle,
            rhs_sq,
            chain_ok,
            sqrt_chain_ok,
            equality_holds,
            condition_holds: cone == ConeMembership::Inside,
            borderline: cone == ConeMembership::Borderline,
        })
    }

    /// Additivity `‖x+y‖ = ‖x‖+‖y‖` against its two-part characterization.
    pub fn additivity_check(
        &self,
        x: &[f64],
        y: &[f64],
        tol: &DecisionTolerance,
    ) -> Result<AdditivityCheck, SeminormError> {
        let sum_norms = self.eval(x)?.add(&self.eval(y)?)?;
        let norm_sum = self.eval(&add(x, y))?;
        let additive =
            sum_norms.sub(&norm_sum)?.norm_inf() <= tol.rel * (sum_norms.norm_inf() + DEFAULT_ABS_FLOOR);
        let scale = sum_norms.f_mul(&sum_norms)?.norm_inf() + DEFAULT_ABS_FLOOR;
        let cone = classify_cone(&self.sip.eval(x, y)?.f_mul(&self.u)?, scale, tol);
        let wd = self.weighted_defect(x, y)?.norm_inf() / scale;
        let defect_borderline = wd > tol.abs && wd < tol.cone_band;
        Ok(AdditivityCheck {
            additive,
            condition_pos: cone == ConeMembership::Inside,
            condition_defect_zero: wd <= tol.abs,
            borderline: cone == ConeMembership::Borderline || defect_borderline,
        })
    }

    /// `‖x+y‖ − (‖x‖ ⊞ ‖y‖)` for an orthogonal pair.
    pub fn pythagoras_residual(&self, x: &[f64], y: &[f64]) -> Result<LatticeVector, SeminormError> {
        let txy = self.sip.eval(x, y)?.norm_inf();
        if txy > ORTHOGONALITY_TOL {
            return Err(SeminormError::PreconditionViolated(txy));
        }
        Ok(self
            .eval(&add(x, y))?
            .sub(&box_plus(&self.eval(x)?, &self.eval(y)?)?)?)
    }

    /// `(‖x+y‖ ⊞ ‖x−y‖) − √2·(‖x‖ ⊞ ‖y‖)`.
    pub fn parallelogram_residual(&self, x: &[f64], y: &[f64]) -> Result<LatticeVector, SeminormError> {
        let lhs = box_plus(&self.eval(&add(x, y))?, &self.eval(&sub(x, y))?)?;
        let rhs = box_plus(&self.eval(x)?, &self.eval(y)?)?.scale(SQRT_2);
        Ok(lhs.sub(&rhs)?)
    }
}

/// Decision thresholds for the equality biconditionals, relative to the
/// natural scale of each check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionTolerance {
    /// Equality and chain tolerance.
    pub rel: f64,
    /// Values within this fraction of the scale are treated as zero.
    pub abs: f64,
    /// Width of the excluded band below zero in cone tests.
    pub cone_band: f64,
}

impl Default for DecisionTolerance {
    fn default() -> Self {
        Self {
            rel: 1e-9,
            abs: 1e-12,
            cone_band: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ConeMembership {
    Inside,
    Borderline,
    Outside,
}

/// Components down to `−abs·scale` count as zero; below `−cone_band·scale`
/// the vector is outside the cone; in between the decision is deferred.
fn classify_cone(v: &LatticeVector, scale: f64, tol: &DecisionTolerance) -> ConeMembership {
    let lowest = v.min_entry() / scale;
    if lowest >= -tol.abs {
        ConeMembership::Inside
    } else if lowest <= -tol.cone_band {
        ConeMembership::Outside
    } else {
        ConeMembership::Borderline
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpenedTriangle {
    pub lhs_sq: LatticeVector,
    pub middle: LatticeVector,
    pub rhs_sq: LatticeVector,
    pub chain_ok: bool,
    /// `‖x+y‖ ≤ √middle ≤ ‖x‖+‖y‖`.
    pub sqrt_chain_ok: bool,
    pub equality_holds: bool,
    /// `T(x,y)·u ∈ F⁺`.
    pub condition_holds: bool,
    pub borderline: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditivityCheck {
    pub additive: bool,
    pub condition_pos: bool,
    pub condition_defect_zero: bool,
    pub borderline: bool,
}

/// Default tolerance for [`vsn_axiom_check`].
pub const VSN_TOL: f64 = 1e-9;

/// Relative residuals of positivity, absolute homogeneity and the triangle
/// inequality at one sample.
pub fn vsn_residuals(spec: &SeminormSpec, x: &[f64], y: &[f64], alpha: f64) -> Result<[f64; 3], SeminormError> {
    let nx = spec.eval(x)?;
    let ny = spec.eval(y)?;
    let floor = DEFAULT_ABS_FLOOR;
    let pos = (-nx.min_entry().min(ny.min_entry())).max(0.0) / (nx.norm_inf().max(ny.norm_inf()) + floor);
    let ax: Vec<f64> = x.iter().map(|v| alpha * v).collect();
    let expect = nx.scale(alpha.abs());
    let hom = spec.eval(&ax)?.sub(&expect)?.norm_inf() / (expect.norm_inf() + floor);
    let sum = nx.add(&ny)?;
    let tri = (-spec.triangle_residual(x, y)?.min_entry()).max(0.0) / (sum.norm_inf() + floor);
    Ok([pos, hom, tri])
}

/// Checks the seminorm axioms on `samples` random pairs and scalars.
pub fn vsn_axiom_check(spec: &SeminormSpec, samples: usize, seed: u64) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = spec.sip().domain_dim();
    let mut worst = [0.0f64; 3];
    for _ in 0..samples {
        let x = uniform_vec(&mut rng, m, -10.0, 10.0);
        let y = uniform_vec(&mut rng, m, -10.0, 10.0);
        let alpha = rng.random_range(-10.0..=10.0);
        let r = vsn_residuals(spec, &x, &y, alpha).unwrap_or([f64::INFINITY; 3]);
        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(v);
        }
    }
    let axioms = [
        Axiom::SeminormPositivity,
        Axiom::AbsoluteHomogeneity,
        Axiom::TriangleInequality,
    ];
    let residuals = axioms
        .iter()
        .zip(worst)
        .map(|(&axiom, worst)| AxiomResidual { axiom, worst })
        .collect();
    AxiomReport::from_residuals(samples, VSN_TOL, residuals)
}
