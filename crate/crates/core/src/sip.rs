//! Vector semi-inner products `T: V × V → F` with `F = ℝⁿ`.
//!
//! Two realizations are provided:
//!
//! * [`PsdFamilySip`]: a family of symmetric PSD matrices `A₁…Aₙ` acting on
//!   `V = ℝᵐ`, with `T(x, y)ⱼ = xᵀAⱼy`. Generic members have a nonzero
//!   Cauchy-Schwarz defect.
//! * [`MultiplicationSip`]: `V = F` and `T(x, y) = x·y`, the f-algebra
//!   product. Its defect is identically zero.
//!
//! Families that violate symmetry or positivity can still be built through
//! [`PsdFamilySip::from_matrices_unchecked`]; [`check_axioms`] then reports
//! the failing axiom instead of panicking.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice_core::{LatticeError, LatticeVector, DEFAULT_ABS_FLOOR};

/// Symmetry tolerance for validated families.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for validated families.
pub const PSD_TOL: f64 = -1e-10;
/// Singular values below this fraction of the largest are treated as zero.
pub const NULL_SPACE_RTOL: f64 = 1e-10;
/// Bound on `‖T(x, y)‖∞` for pairs returned by [`orthogonal_sample`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SipError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("domain vector has dimension {got}, expected {expected}")]
    DomainMismatch { expected: usize, got: usize },
    #[error("matrix {index} is {rows}x{cols}, expected {m}x{m}")]
    BadShape {
        index: usize,
        rows: usize,
        cols: usize,
        m: usize,
    },
    #[error("a semi-inner product needs positive domain and codomain dimensions")]
    Empty,
    #[error("matrix {index} is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { index: usize, asymmetry: f64 },
    #[error("matrix {index} is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { index: usize, min_eigenvalue: f64 },
    #[error("only the zero vector is orthogonal to the given vector")]
    NoNontrivialOrthogonal,
    #[error("orthogonal sampling needs a nonzero vector")]
    ZeroVector,
    #[error("T(x, x) has entry {value:e} below the rounding floor")]
    NegativeSquare { value: f64 },
}

/// `T(x, y)ⱼ = xᵀAⱼy` on `V = ℝᵐ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdFamilySip {
    m: usize,
    matrices: Vec<DMatrix<f64>>,
}

impl PsdFamilySip {
    /// Builds a family after checking symmetry and positive semidefiniteness.
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self, SipError> {
        let sip = Self::from_matrices_unchecked(matrices)?;
        sip.validate()?;
        Ok(sip)
    }

    /// Builds a family checking only shapes and finiteness.
    pub fn from_matrices_unchecked(matrices: Vec<DMatrix<f64>>) -> Result<Self, SipError> {
        let m = matrices.first().ok_or(SipError::Empty)?.nrows();
        if m == 0 {
            return Err(SipError::Empty);
        }
        for (index, a) in matrices.iter().enumerate() {
            if a.nrows() != m || a.ncols() != m {
                return Err(SipError::BadShape {
                    index,
                    rows: a.nrows(),
                    cols: a.ncols(),
                    m,
                });
            }
            if let Some(&value) = a.iter().find(|v| !v.is_finite()) {
                return Err(LatticeError::NonFinite { index, value }.into());
            }
        }
        Ok(Self { m, matrices })
    }

    /// `Aⱼ = BⱼᵀBⱼ` for each factor `Bⱼ` (any number of rows, `m` columns),
    /// symmetrized so that `Aⱼ = Aⱼᵀ` holds bit for bit.
    pub fn from_factors(factors: &[DMatrix<f64>]) -> Result<Self, SipError> {
        Self::from_matrices_unchecked(
            factors
                .iter()
                .map(|b| {
                    let a = b.transpose() * b;
                    (&a + a.transpose()) * 0.5
                })
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<(), SipError> {
        for (index, a) in self.matrices.iter().enumerate() {
            let asymmetry = (a - a.transpose()).amax();
            if asymmetry > SYMMETRY_TOL {
                return Err(SipError::NotSymmetric { index, asymmetry });
            }
            let min_eigenvalue = a.clone().symmetric_eigenvalues().min();
            if min_eigenvalue < PSD_TOL {
                return Err(SipError::NotPsd {
                    index,
                    min_eigenvalue,
                });
            }
        }
        Ok(())
    }

    pub fn domain_dim(&self) -> usize {
        self.m
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub(crate) fn matrices_mut(&mut self) -> &mut Vec<DMatrix<f64>> {
        &mut self.matrices
    }
}

/// `T(x, y) = x·y` on `V = F = ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiplicationSip {
    n: usize,
}

impl MultiplicationSip {
    pub fn new(n: usize) -> Result<Self, SipError> {
        if n == 0 {
            return Err(SipError::Empty);
        }
        Ok(Self { n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// A concrete vector semi-inner product.
#[derive(Debug, Clone, PartialEq)]
pub enum Sip {
    PsdFamily(PsdFamilySip),
    Multiplication(MultiplicationSip),
}

impl From<PsdFamilySip> for Sip {
    fn from(s: PsdFamilySip) -> Self {
        Sip::PsdFamily(s)
    }
}

impl From<MultiplicationSip> for Sip {
    fn from(s: MultiplicationSip) -> Self {
        Sip::Multiplication(s)
    }
}

fn bilinear(a: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    // column-major: sum over columns l of y_l · (A[:, l] · x)
    let m = x.len();
    let data = a.as_slice();
    let mut acc = 0.0;
    for (l, &yl) in y.iter().enumerate() {
        let col = &data[l * m..(l + 1) * m];
        let dot: f64 = col.iter().zip(x).map(|(c, xi)| c * xi).sum();
        acc += yl * dot;
    }
    acc
}

fn bilinear_abs(a: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let m = x.len();
    let data = a.as_slice();
    let mut acc = 0.0;
    for (l, &yl) in y.iter().enumerate() {
        let col = &data[l * m..(l + 1) * m];
        let dot: f64 = col.iter().zip(x).map(|(c, xi)| (c * xi).abs()).sum();
        acc += yl.abs() * dot;
    }
    acc
}

impl Sip {
    /// The dot product on `ℝᵐ` as a one-component family.
    pub fn dot(m: usize) -> Self {
        Sip::PsdFamily(PsdFamilySip {
            m,
            matrices: vec![DMatrix::identity(m, m)],
        })
    }

    pub fn multiplication(n: usize) -> Result<Self, SipError> {
        Ok(Sip::Multiplication(MultiplicationSip::new(n)?))
    }

    pub fn domain_dim(&self) -> usize {
        match self {
            Sip::PsdFamily(s) => s.domain_dim(),
            Sip::Multiplication(s) => s.dim(),
        }
    }

    pub fn codomain_dim(&self) -> usize {
        match self {
            Sip::PsdFamily(s) => s.codomain_dim(),
            Sip::Multiplication(s) => s.dim(),
        }
    }

    pub fn kind(&self) -> SipKind {
        match self {
            Sip::PsdFamily(_) => SipKind::PsdFamily,
            Sip::Multiplication(_) => SipKind::Multiplication,
        }
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<(), SipError> {
        let expected = self.domain_dim();
        if x.len() != expected {
            return Err(SipError::DomainMismatch {
                expected,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `T(x, y) ∈ F`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<LatticeVector, SipError> {
        let mut out = vec![0.0; self.codomain_dim()];
        self.eval_into(x, y, &mut out)?;
        Ok(LatticeVector::new(out)?)
    }

    /// Writes `T(x, y)` into `out` without allocating.
    pub(crate) fn eval_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<(), SipError> {
        self.check_domain(x)?;
        self.check_domain(y)?;
        debug_assert_eq!(out.len(), self.codomain_dim());
        match self {
            Sip::PsdFamily(s) => {
                for (o, a) in out.iter_mut().zip(&s.matrices) {
                    *o = bilinear(a, x, y);
                }
            }
            Sip::Multiplication(_) => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o = a * b;
                }
            }
        }
        Ok(())
    }

    /// Entrywise magnitude bound `|x|ᵀ|Aⱼ||y|`; the natural scale for
    /// rounding errors in [`Sip::eval`].
    pub fn abs_scale(&self, x: &[f64], y: &[f64]) -> Result<LatticeVector, SipError> {
        self.check_domain(x)?;
        self.check_domain(y)?;
        let out = match self {
            Sip::PsdFamily(s) => s.matrices.iter().map(|a| bilinear_abs(a, x, y)).collect(),
            Sip::Multiplication(_) => x.iter().zip(y).map(|(a, b)| (a * b).abs()).collect(),
        };
        Ok(LatticeVector::new(out)?)
    }

    /// `T(x, x)` with rounding noise below zero clamped away.
    ///
    /// Entries as low as `−1e−10·|x|ᵀ|Aⱼ||x| − 1e−12` are set to zero; anything
    /// lower means the form is not positive and is reported as an error.
    pub fn quadratic(&self, x: &[f64]) -> Result<LatticeVector, SipError> {
        let t = self.eval(x, x)?;
        if t.in_positive_cone(0.0) {
            return Ok(t);
        }
        let scale = self.abs_scale(x, x)?;
        let mut out = t.into_vec();
        for (v, s) in out.iter_mut().zip(scale.as_slice()) {
            if *v < 0.0 {
                if *v < -(1e-10 * s + DEFAULT_ABS_FLOOR) {
                    return Err(SipError::NegativeSquare { value: *v });
                }
                *v = 0.0;
            }
        }
        Ok(LatticeVector::new(out)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SipKind {
    PsdFamily,
    Multiplication,
}

/// Axioms checked by [`check_axioms`] and the seminorm axiom check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    AdditivityLeft,
    AdditivityRight,
    Homogeneity,
    Symmetry,
    Positivity,
    SeminormPositivity,
    AbsoluteHomogeneity,
    TriangleInequality,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::AdditivityLeft => "additivity_left",
            Axiom::AdditivityRight => "additivity_right",
            Axiom::Homogeneity => "homogeneity",
            Axiom::Symmetry => "symmetry",
            Axiom::Positivity => "positivity",
            Axiom::SeminormPositivity => "seminorm_positivity",
            Axiom::AbsoluteHomogeneity => "absolute_homogeneity",
            Axiom::TriangleInequality => "triangle_inequality",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomResidual {
    pub axiom: Axiom,
    /// Worst relative residual over all samples.
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub tolerance: f64,
    pub residuals: Vec<AxiomResidual>,
    pub passed: bool,
}

impl AxiomReport {
    pub(crate) fn from_residuals(samples: usize, tolerance: f64, residuals: Vec<AxiomResidual>) -> Self {
        let passed = residuals.iter().all(|r| r.worst <= tolerance);
        Self {
            samples,
            tolerance,
            residuals,
            passed,
        }
    }

    pub fn residual(&self, axiom: Axiom) -> Option<f64> {
        self.residuals.iter().find(|r| r.axiom == axiom).map(|r| r.worst)
    }

    pub fn failed_axioms(&self) -> Vec<Axiom> {
        self.residuals
            .iter()
            .filter(|r| r.worst > self.tolerance)
            .map(|r| r.axiom)
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.worst))
    }
}

/// Default tolerance for [`check_axioms`].
pub const AXIOM_TOL: f64 = 1e-10;

fn rel(diff: &LatticeVector, scale: &LatticeVector) -> f64 {
    diff.as_slice()
        .iter()
        .zip(scale.as_slice())
        .fold(0.0, |m, (d, s)| m.max(d.abs() / (s + DEFAULT_ABS_FLOOR)))
}

fn combo(alpha: f64, x: &[f64], beta: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| alpha * a + beta * b).collect()
}

/// Relative residuals of the five sip axioms at one sample, in the order
/// additivity left, additivity right, homogeneity, symmetry, positivity.
///
/// Each residual is measured entrywise against the rounding scale
/// `|x|ᵀ|Aⱼ||y|` of the terms involved.
pub fn axiom_residuals(
    sip: &Sip,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    lambda: f64,
) -> Result<[f64; 5], SipError> {
    let xz = sip.eval(x, z)?;
    let yz = sip.eval(y, z)?;
    let xy = sip.eval(x, y)?;
    let s_xz = sip.abs_scale(x, z)?;
    let s_yz = sip.abs_scale(y, z)?;
    let s_xy = sip.abs_scale(x, y)?;
    let s_add = s_xz.add(&s_yz)?;
    let x_plus_y = combo(1.0, x, 1.0, y);

    let add_left = sip.eval(&x_plus_y, z)?.sub(&xz.add(&yz)?)?;
    let add_right = sip.eval(z, &x_plus_y)?.sub(&sip.eval(z, x)?.add(&sip.eval(z, y)?)?)?;

    let lx = combo(lambda, x, 0.0, x);
    let ly = combo(lambda, y, 0.0, y);
    let l_xy = xy.scale(lambda);
    let s_l = s_xy.scale(lambda.abs());
    let hom = rel(&sip.eval(&lx, y)?.sub(&l_xy)?, &s_l).max(rel(&sip.eval(x, &ly)?.sub(&l_xy)?, &s_l));

    let sym = rel(&xy.sub(&sip.eval(y, x)?)?, &s_xy);

    let mut pos: f64 = 0.0;
    for v in [x, y, z] {
        let t = sip.eval(v, v)?;
        let s = sip.abs_scale(v, v)?;
        for (a, b) in t.as_slice().iter().zip(s.as_slice()) {
            if *a < 0.0 {
                pos = pos.max(-a / (b + DEFAULT_ABS_FLOOR));
            }
        }
    }

    Ok([rel(&add_left, &s_add), rel(&add_right, &s_add), hom, sym, pos])
}

pub(crate) fn uniform_vec(rng: &mut impl Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Checks the five sip axioms on `samples` pseudo-random triples with entries in
/// `[−10, 10]` and scalars in `[−10, 10]`. Deterministic in `seed`.
pub fn check_axioms(sip: &Sip, samples: usize, seed: u64) -> AxiomReport {
    check_axioms_with_tol(sip, samples, seed, AXIOM_TOL)
}

pub fn check_axioms_with_tol(sip: &Sip, samples: usize, seed: u64, tolerance: f64) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = sip.domain_dim();
    let mut worst = [0.0f64; 5];
    for _ in 0..samples {
        let x = uniform_vec(&mut rng, m, -10.0, 10.0);
        let y = uniform_vec(&mut rng, m, -10.0, 10.0);
        let z = uniform_vec(&mut rng, m, -10.0, 10.0);
        let lambda = rng.random_range(-10.0..=10.0);
        let r = axiom_residuals(sip, &x, &y, &z, lambda).expect("sampled vectors match the domain");
        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(v);
        }
    }
    let axioms = [
        Axiom::AdditivityLeft,
        Axiom::AdditivityRight,
        Axiom::Homogeneity,
        Axiom::Symmetry,
        Axiom::Positivity,
    ];
    let residuals = axioms
        .iter()
        .zip(worst)
        .map(|(&axiom, worst)| AxiomResidual { axiom, worst })
        .collect();
    AxiomReport::from_residuals(samples, tolerance, residuals)
}

/// Random PSD family with `Aⱼ = BⱼᵀBⱼ`, `Bⱼ` an `m×m` matrix with entries in
/// `[−1, 1]`. Deterministic in `seed`.
pub fn make_psd_sip(m: usize, n: usize, seed: u64) -> Result<PsdFamilySip, SipError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    make_psd_sip_with_rank(m, n, m, &mut rng)
}

/// Like [`make_psd_sip`] but with `rank × m` factors, so every `Aⱼ` has rank
/// at most `rank`.
pub fn make_psd_sip_with_rank(
    m: usize,
    n: usize,
    rank: usize,
    rng: &mut impl Rng,
) -> Result<PsdFamilySip, SipError> {
    if m == 0 || n == 0 || rank == 0 {
        return Err(SipError::Empty);
    }
    let factors: Vec<DMatrix<f64>> = (0..n)
        .map(|_| DMatrix::from_fn(rank, m, |_, _| rng.random_range(-1.0..=1.0)))
        .collect();
    PsdFamilySip::from_factors(&factors)
}

/// Returns `y` with `‖y‖∞ = 1` and `T(x, y) ≈ 0`.
///
/// For a PSD family, `y` is a random combination of a basis of the null space
/// of the `n × m` matrix with rows `(Aⱼx)ᵀ`; for the multiplication sip it is
/// supported on the zero set of `x`. The largest-magnitude entry of `y` is
/// `+1`.
pub fn orthogonal_sample(sip: &Sip, x: &[f64], seed: u64) -> Result<Vec<f64>, SipError> {
    sip.check_domain(x)?;
    if x.iter().all(|&v| v == 0.0) {
        return Err(SipError::ZeroVector);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = match sip {
        Sip::Multiplication(_) => {
            if x.iter().all(|&v| v != 0.0) {
                return Err(SipError::NoNontrivialOrthogonal);
            }
            x.iter()
                .map(|&v| if v == 0.0 { rng.random_range(-1.0..=1.0) } else { 0.0 })
                .collect::<Vec<f64>>()
        }
        Sip::PsdFamily(s) => {
            let m = s.domain_dim();
            let xv = nalgebra::DVector::from_column_slice(x);
            // pad to m×m so the decomposition returns a full right basis
            let mut stacked = DMatrix::zeros(m.max(s.codomain_dim()), m);
            for (j, a) in s.matrices().iter().enumerate() {
                let row = a * &xv;
                stacked.row_mut(j).copy_from(&row.transpose());
            }
            let svd = stacked.svd(false, true);
            let v_t = svd.v_t.expect("right singular vectors requested");
            let sigma_max = svd.singular_values.max();
            let cutoff = NULL_SPACE_RTOL * sigma_max;
            let null: Vec<usize> = svd
                .singular_values
                .iter()
                .enumerate()
                .filter(|(_, &s)| s <= cutoff)
                .map(|(i, _)| i)
                .collect();
            if null.is_empty() {
                return Err(SipError::NoNontrivialOrthogonal);
            }
            let mut y = vec![0.0; m];
            for &i in &null {
                let c: f64 = rng.random_range(-1.0..=1.0);
                for (yk, vk) in y.iter_mut().zip(v_t.row(i).iter()) {
                    *yk += c * vk;
                }
            }
            y
        }
    };
    let (imax, &peak) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty domain");
    if peak == 0.0 {
        return Err(SipError::NoNontrivialOrthogonal);
    }
    let mut y: Vec<f64> = y.iter().map(|v| v / peak).collect();
    y[imax] = 1.0;
    if sip.eval(x, &y)?.norm_inf() > ORTHOGONALITY_TOL {
        return Err(SipError::NoNontrivialOrthogonal);
    }
    Ok(y)
}

/// On-disk instance: `{ kind, m, n, matrices?, u, x, y }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub sip: Sip,
    pub u: LatticeVector,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub kind: SipKind,
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Vec<Vec<f64>>>>,
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Sip(#[from] SipError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("instance is inconsistent: {0}")]
    Inconsistent(String),
}

impl Instance {
    pub fn new(sip: Sip, u: LatticeVector, x: Vec<f64>, y: Vec<f64>) -> Result<Self, InstanceError> {
        let inst = Self { sip, u, x, y };
        inst.check()?;
        Ok(inst)
    }

    fn check(&self) -> Result<(), InstanceError> {
        if self.u.dim() != self.sip.codomain_dim() {
            return Err(InstanceError::Inconsistent(format!(
                "u has dimension {}, codomain is {}",
                self.u.dim(),
                self.sip.codomain_dim()
            )));
        }
        self.sip.check_domain(&self.x)?;
        self.sip.check_domain(&self.y)?;
        if self.x.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return Err(InstanceError::Inconsistent("non-finite domain entry".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> InstanceJson {
        let matrices = match &self.sip {
            Sip::PsdFamily(s) => Some(
                s.matrices()
                    .iter()
                    .map(|a| a.row_iter().map(|r| r.iter().copied().collect()).collect())
                    .collect(),
            ),
            Sip::Multiplication(_) => None,
        };
        InstanceJson {
            kind: self.sip.kind(),
            m: self.sip.domain_dim(),
            n: self.sip.codomain_dim(),
            matrices,
            u: self.u.as_slice().to_vec(),
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }

    pub fn from_json(raw: InstanceJson) -> Result<Self, InstanceError> {
        let sip = match raw.kind {
            SipKind::Multiplication => {
                if raw.m != raw.n {
                    return Err(InstanceError::Inconsistent(
                        "multiplication sip needs m == n".into(),
                    ));
                }
                Sip::multiplication(raw.n)?
            }
            SipKind::PsdFamily => {
                let mats = raw
                    .matrices
                    .ok_or_else(|| InstanceError::Inconsistent("missing matrices".into()))?;
                if mats.len() != raw.n {
                    return Err(InstanceError::Inconsistent(format!(
                        "{} matrices for n = {}",
                        mats.len(),
                        raw.n
                    )));
                }
                let mut out = Vec::with_capacity(mats.len());
                for (index, rows) in mats.iter().enumerate() {
                    if rows.len() != raw.m || rows.iter().any(|r| r.len() != raw.m) {
                        return Err(SipError::BadShape {
                            index,
                            rows: rows.len(),
                            cols: rows.first().map_or(0, Vec::len),
                            m: raw.m,
                        }
                        .into());
                    }
                    out.push(DMatrix::from_fn(raw.m, raw.m, |r, c| rows[r][c]));
                }
                Sip::PsdFamily(PsdFamilySip::from_matrices_unchecked(out)?)
            }
        };
        Self::new(sip, LatticeVector::new(raw.u)?, raw.x, raw.y)
    }
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = InstanceJson::deserialize(d)?;
        Instance::from_json(raw).map_err(serde::de::Error::custom)
    }
}
