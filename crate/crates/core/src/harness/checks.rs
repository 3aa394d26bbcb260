//! Per-instance checks. Every check is a pure function of the instance and
//! the settings, so a recorded failure replays bit for bit.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use super::config::{CheckSettings, ConfigError, Theorem};
use crate::cauchy_schwarz::{bracketed_components, cs_check, defect, defect_from_gram, gram, LambdaGrid};
use crate::lattice_core::LatticeVector;
use crate::lattice_means::{box_plus, box_plus_oracle, box_times, box_times_oracle, AngleGrid, ThetaGrid};
use crate::seminorms::SeminormSpec;
use crate::sip::{axiom_residuals, Instance};

/// One named comparison of a residual against its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubCheck {
    pub name: &'static str,
    pub residual: f64,
    pub threshold: f64,
    /// The comparison could not be decided at float precision and is left
    /// out of the tally.
    pub borderline: bool,
}

impl SubCheck {
    fn new(name: &'static str, residual: f64, threshold: f64) -> Self {
        // non-finite residuals would not survive a JSON round trip
        let residual = if residual.is_finite() { residual } else { f64::MAX };
        Self {
            name,
            residual,
            threshold,
            borderline: false,
        }
    }

    /// A biconditional: residual 1 on mismatch, deferred when borderline.
    fn iff(name: &'static str, mismatch: bool, borderline: bool) -> Self {
        Self {
            name,
            residual: if mismatch && !borderline { 1.0 } else { 0.0 },
            threshold: 0.5,
            borderline,
        }
    }

    pub fn failed(&self) -> bool {
        self.residual > self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Pass,
    Fail,
    Borderline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub subchecks: Vec<SubCheck>,
}

impl CheckOutcome {
    fn evaluation_error() -> Self {
        Self {
            subchecks: vec![SubCheck::new("evaluation", 1.0, 0.0)],
        }
    }

    pub fn status(&self) -> TrialStatus {
        if self.subchecks.iter().any(SubCheck::failed) {
            TrialStatus::Fail
        } else if self.subchecks.iter().any(|s| s.borderline) {
            TrialStatus::Borderline
        } else {
            TrialStatus::Pass
        }
    }

    pub fn first_failure(&self) -> Option<&SubCheck> {
        self.subchecks.iter().find(|s| s.failed())
    }

    pub fn get(&self, name: &str) -> Option<&SubCheck> {
        self.subchecks.iter().find(|s| s.name == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.subchecks.iter().fold(0.0, |m, s| m.max(s.residual))
    }
}

type CheckResult = Result<Vec<SubCheck>, Box<dyn std::error::Error>>;

fn pos_part(v: &LatticeVector) -> f64 {
    v.max_entry().max(0.0)
}

fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

/// Grids built once from [`CheckSettings`] and shared by all trials.
#[derive(Debug, Clone)]
pub struct Checker {
    settings: CheckSettings,
    theta: ThetaGrid,
    angles: AngleGrid,
    quarter: AngleGrid,
    lambda: LambdaGrid,
}

impl Checker {
    pub fn new(settings: CheckSettings) -> Result<Self, ConfigError> {
        settings.validate()?;
        let grid_err = |name| move |source| ConfigError::Grid { name, source };
        let angles = AngleGrid::full(settings.angle_grid).map_err(grid_err("angle"))?;
        Ok(Self {
            theta: ThetaGrid::from_params(settings.theta_grid).map_err(grid_err("theta"))?,
            quarter: angles.restrict(0.0, FRAC_PI_2).map_err(grid_err("angle"))?,
            angles,
            lambda: LambdaGrid::from_params(settings.lambda_grid).map_err(grid_err("lambda"))?,
            settings,
        })
    }

    pub fn settings(&self) -> &CheckSettings {
        &self.settings
    }

    pub fn run(&self, theorem: Theorem, inst: &Instance) -> CheckOutcome {
        let r = match theorem {
            Theorem::Axioms => self.axioms(inst),
            Theorem::Cs => self.cs(inst),
            Theorem::Prop23 => self.prop23(inst),
            Theorem::Vsn => self.vsn(inst),
            Theorem::Sharp => self.sharp(inst),
            Theorem::Additivity => self.additivity(inst),
            Theorem::Pythagoras => self.pythagoras(inst),
            Theorem::Parallelogram => self.parallelogram(inst),
            Theorem::Oracle => self.oracle(inst),
        };
        match r {
            Ok(subchecks) => CheckOutcome { subchecks },
            Err(_) => CheckOutcome::evaluation_error(),
        }
    }

    fn rel(&self) -> f64 {
        self.settings.tolerances.rel
    }

    fn floor(&self) -> f64 {
        self.settings.tolerances.abs
    }

    fn spec(&self, inst: &Instance) -> Result<SeminormSpec, Box<dyn std::error::Error>> {
        Ok(SeminormSpec::new(inst.sip.clone(), inst.u.clone())?)
    }

    fn axioms(&self, inst: &Instance) -> CheckResult {
        let (x, y) = (&inst.x, &inst.y);
        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let mut worst = [0.0f64; 5];
        for lambda in [1.75, -2.5] {
            let r = axiom_residuals(&inst.sip, x, y, &z, lambda)?;
            for (w, v) in worst.iter_mut().zip(r) {
                *w = w.max(v);
            }
        }
        // colinear pairs cannot see an asymmetric form, so probe basis pairs too
        let (sym, pos) = basis_residuals(inst)?;
        worst[3] = worst[3].max(sym);
        worst[4] = worst[4].max(pos);
        let names = ["additivity_left", "additivity_right", "homogeneity", "symmetry", "positivity"];
        Ok(names
            .iter()
            .zip(worst)
            .map(|(&n, r)| SubCheck::new(n, r, self.rel()))
            .collect())
    }

    fn cs(&self, inst: &Instance) -> CheckResult {
        let th = &self.settings.thresholds;
        let (a, b, c) = gram(&inst.sip, &inst.x, &inst.y)?;
        let bound = box_times(&a, &c)?;
        let d = defect_from_gram(&a, &b, &c);
        let scale = bound.norm_inf() + self.floor();
        let identity = b.abs_val().sub(&bound.sub(&d.scale(0.5))?)?.norm_inf() / scale;
        let inequality = pos_part(&b.abs_val().sub(&bound)?) / scale;
        let nonneg = pos_part(&d.neg()) / scale;
        let eq = cs_check(&inst.sip, &inst.x, &inst.y, self.rel())?;
        Ok(vec![
            SubCheck::new("identity", identity, th.cs_identity),
            SubCheck::new("inequality", inequality, th.cs_inequality),
            SubCheck::new("defect_nonnegative", nonneg, th.cs_inequality),
            SubCheck::iff("equality_iff", eq.equality_holds != eq.defect_zero, eq.borderline),
        ])
    }

    fn prop23(&self, inst: &Instance) -> CheckResult {
        let tol = self.settings.thresholds.prop23;
        let a = inst.sip.quadratic(&inst.x)?;
        let b = inst.sip.quadratic(&inst.y)?;
        let c = &inst.u;
        let floor = self.floor();
        let rel = |lhs: &LatticeVector, rhs: &LatticeVector| -> Result<f64, Box<dyn std::error::Error>> {
            Ok(lhs.sub(rhs)?.norm_inf() / (lhs.norm_inf().max(rhs.norm_inf()) + floor))
        };
        let left = rel(&box_times(&a.add(&b)?, c)?, &box_plus(&box_times(&a, c)?, &box_times(&b, c)?)?)?;
        let right = rel(&box_times(&a, &b.add(c)?)?, &box_plus(&box_times(&a, &b)?, &box_times(&a, c)?)?)?;
        let mut hom_left: f64 = 0.0;
        let mut hom_right: f64 = 0.0;
        let base = box_times(&a, &b)?;
        for lambda in [0.0, 4.0, inst.x[0].abs() + 0.5] {
            let expect = base.scale(lambda.sqrt());
            hom_left = hom_left.max(rel(&box_times(&a.scale(lambda), &b)?, &expect)?);
            hom_right = hom_right.max(rel(&box_times(&a, &b.scale(lambda))?, &expect)?);
        }
        Ok(vec![
            SubCheck::new("biadditivity_left", left, tol),
            SubCheck::new("biadditivity_right", right, tol),
            SubCheck::new("homogeneity_left", hom_left, tol),
            SubCheck::new("homogeneity_right", hom_right, tol),
        ])
    }

    fn vsn(&self, inst: &Instance) -> CheckResult {
        let spec = self.spec(inst)?;
        let (x, y) = (&inst.x, &inst.y);
        let mut worst = [0.0f64; 3];
        for alpha in [-2.5, 0.0, 1.75] {
            let r = crate::seminorms::vsn_residuals(&spec, x, y, alpha)?;
            for (w, v) in worst.iter_mut().zip(r) {
                *w = w.max(v);
            }
        }
        let mut square: f64 = 0.0;
        for v in [x.clone(), y.clone(), add(x, y)] {
            let n = spec.eval(&v)?;
            let sq = spec.eval_sq(&v)?;
            square = square.max(n.f_mul(&n)?.sub(&sq)?.norm_inf() / (sq.norm_inf() + self.floor()));
        }
        let rel = self.rel();
        Ok(vec![
            SubCheck::new("positivity", worst[0], rel),
            SubCheck::new("absolute_homogeneity", worst[1], rel),
            SubCheck::new("triangle", worst[2], rel),
            SubCheck::new("square_identity", square, self.settings.thresholds.square_identity),
        ])
    }

    fn sharp(&self, inst: &Instance) -> CheckResult {
        let th = &self.settings.thresholds;
        let spec = self.spec(inst)?;
        let (x, y) = (&inst.x, &inst.y);
        let st = spec.sharpened_triangle(x, y, &self.settings.tolerances)?;
        let scale = st.rhs_sq.norm_inf().max(st.lhs_sq.norm_inf()) + self.floor();
        let lower = pos_part(&st.lhs_sq.sub(&st.middle)?) / scale;
        let upper = pos_part(&st.middle.sub(&st.rhs_sq)?) / scale;

        let norm_sum = spec.eval(&add(x, y))?;
        let sum_norms = spec.eval(x)?.add(&spec.eval(y)?)?;
        let root = LatticeVector::new(st.middle.as_slice().iter().map(|v| v.max(0.0).sqrt()).collect())?;
        let sqrt_chain = pos_part(&norm_sum.sub(&root)?).max(pos_part(&root.sub(&sum_norms)?))
            / (sum_norms.norm_inf() + self.floor());

        // the u-weighted defect against its grid realization through the seminorm
        let closed = spec.weighted_defect(x, y)?;
        let grid = spec.weighted_defect_grid(x, y, &self.lambda)?;
        let (a, _, c) = gram(&inst.sip, x, y)?;
        let wscale = box_times(&a, &c)?.f_mul(&inst.u)?.norm_inf() + self.floor();
        let below = pos_part(&closed.sub(&grid)?) / wscale;
        let bracketed = bracketed_components(&inst.sip, x, y, &self.lambda)?;
        let gap = bracketed_gap(&grid.sub(&closed)?, &bracketed) / wscale;

        Ok(vec![
            SubCheck::new("chain_lower", lower, th.chain),
            SubCheck::new("chain_upper", upper, th.chain),
            SubCheck::new("sqrt_chain", sqrt_chain, self.rel()),
            SubCheck::iff("equality_iff", st.equality_holds != st.condition_holds, st.borderline),
            SubCheck::new("weighted_defect_sandwich", below, th.defect_sandwich),
            SubCheck::new("weighted_defect_gap", gap, th.defect_gap),
        ])
    }

    fn additivity(&self, inst: &Instance) -> CheckResult {
        let ac = self
            .spec(inst)?
            .additivity_check(&inst.x, &inst.y, &self.settings.tolerances)?;
        let expected = ac.condition_pos && ac.condition_defect_zero;
        Ok(vec![SubCheck::iff("additivity_iff", ac.additive != expected, ac.borderline)])
    }

    fn pythagoras(&self, inst: &Instance) -> CheckResult {
        let spec = self.spec(inst)?;
        let txy = inst.sip.eval(&inst.x, &inst.y)?.norm_inf();
        let pre = SubCheck::new("precondition", txy, self.settings.thresholds.orthogonality);
        if pre.failed() {
            return Ok(vec![pre]);
        }
        let r = spec.pythagoras_residual(&inst.x, &inst.y)?;
        let scale = box_plus(&spec.eval(&inst.x)?, &spec.eval(&inst.y)?)?.norm_inf() + self.floor();
        Ok(vec![pre, SubCheck::new("residual", r.norm_inf() / scale, self.rel())])
    }

    fn parallelogram(&self, inst: &Instance) -> CheckResult {
        let spec = self.spec(inst)?;
        let r = spec.parallelogram_residual(&inst.x, &inst.y)?;
        let scale = SQRT_2 * box_plus(&spec.eval(&inst.x)?, &spec.eval(&inst.y)?)?.norm_inf() + self.floor();
        Ok(vec![SubCheck::new("residual", r.norm_inf() / scale, self.rel())])
    }

    fn oracle(&self, inst: &Instance) -> CheckResult {
        let th = &self.settings.thresholds;
        let floor = self.floor();
        let (x, y) = (&inst.x, &inst.y);
        let (a, b, c) = gram(&inst.sip, x, y)?;

        let closed = box_times(&a, &c)?;
        let est = box_times_oracle(&a, &c, &self.theta)?;
        let mut tm_sandwich: f64 = 0.0;
        let mut tm_gap: f64 = 0.0;
        for (j, (&o, &e)) in est.value.as_slice().iter().zip(closed.as_slice()).enumerate() {
            tm_sandwich = tm_sandwich.max((e - o).max(0.0) / (e + floor));
            if !est.out_of_range.contains(&j) {
                tm_gap = tm_gap.max((o - e).max(0.0) / (e + floor));
            }
        }

        let closed = box_plus(&b, &inst.u)?;
        let est = box_plus_oracle(&b, &inst.u, &self.angles)?;
        let mut pl_sandwich: f64 = 0.0;
        let mut pl_gap: f64 = 0.0;
        for (&o, &e) in est.as_slice().iter().zip(closed.as_slice()) {
            pl_sandwich = pl_sandwich.max((o - e).max(0.0) / (e + floor));
            pl_gap = pl_gap.max((e - o).max(0.0) / (e + floor));
        }

        let full = box_plus_oracle(&a, &c, &self.angles)?;
        let quarter = box_plus_oracle(&a, &c, &self.quarter)?;
        let quarter_res = full.sub(&quarter)?.norm_inf() / (box_plus(&a, &c)?.norm_inf() + floor);

        let d = defect(&inst.sip, x, y, &self.lambda)?;
        let scale = box_times(&a, &c)?.norm_inf() + floor;
        let d_below = pos_part(&d.gap.neg()) / scale;
        let bracketed = bracketed_components(&inst.sip, x, y, &self.lambda)?;
        let d_gap = bracketed_gap(&d.gap, &bracketed) / scale;

        Ok(vec![
            SubCheck::new("box_times_sandwich", tm_sandwich, th.sandwich),
            SubCheck::new("box_times_gap", tm_gap, th.box_times_gap),
            SubCheck::new("box_plus_sandwich", pl_sandwich, th.sandwich),
            SubCheck::new("box_plus_gap", pl_gap, th.box_plus_gap),
            SubCheck::new("quarter_circle", quarter_res, th.quarter_circle),
            SubCheck::new("defect_sandwich", d_below, th.defect_sandwich),
            SubCheck::new("defect_gap", d_gap, th.defect_gap),
        ])
    }
}

/// Symmetry and positivity residuals on standard basis vectors, measured
/// like [`axiom_residuals`]: `|T(eᵢ,eⱼ) − T(eⱼ,eᵢ)|` against the larger of
/// the two and negative parts of `T(eᵢ,eᵢ)` against their magnitude.
fn basis_residuals(inst: &Instance) -> Result<(f64, f64), Box<dyn std::error::Error>> {
    let sip = &inst.sip;
    let m = sip.domain_dim();
    let floor = crate::lattice_core::DEFAULT_ABS_FLOOR;
    let e = |i: usize| -> Vec<f64> { (0..m).map(|k| if k == i { 1.0 } else { 0.0 }).collect() };
    let (mut sym, mut pos): (f64, f64) = (0.0, 0.0);
    for i in 0..m {
        let ei = e(i);
        let d = sip.eval(&ei, &ei)?;
        for &v in d.as_slice() {
            if v < 0.0 {
                pos = pos.max(-v / (v.abs() + floor));
            }
        }
        for j in i + 1..m {
            let ej = e(j);
            let ij = sip.eval(&ei, &ej)?;
            let ji = sip.eval(&ej, &ei)?;
            for (a, b) in ij.as_slice().iter().zip(ji.as_slice()) {
                sym = sym.max((a - b).abs() / (a.abs().max(b.abs()) + floor));
            }
        }
    }
    Ok((sym, pos))
}

fn bracketed_gap(gap: &LatticeVector, bracketed: &[bool]) -> f64 {
    gap.as_slice()
        .iter()
        .zip(bracketed)
        .filter(|(_, &b)| b)
        .fold(0.0, |m, (&g, _)| m.max(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sip::{PsdFamilySip, Sip};
    use nalgebra::DMatrix;

    fn lv(v: &[f64]) -> LatticeVector {
        LatticeVector::new(v.to_vec()).unwrap()
    }

    fn checker() -> Checker {
        Checker::new(CheckSettings::default()).unwrap()
    }

    fn mul(u: &[f64], x: &[f64], y: &[f64]) -> Instance {
        Instance::new(Sip::multiplication(u.len()).unwrap(), lv(u), x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn all_theorems_pass_on_simple_instances() {
        let c = checker();
        let cases = [
            mul(&[1.0, 1.0], &[1.0, 2.0], &[3.0, 1.0]),
            mul(&[1.0, 1.0], &[1.0, -1.0], &[1.0, 1.0]),
            mul(&[0.0, 0.0], &[1.0, 2.0], &[3.0, 4.0]),
            Instance::new(Sip::dot(2), lv(&[1.0]), vec![1.0, 0.0], vec![0.0, 1.0]).unwrap(),
            Instance::new(Sip::dot(2), lv(&[2.0]), vec![3.0, 4.0], vec![-6.0, -8.0]).unwrap(),
        ];
        for inst in &cases {
            for t in Theorem::ALL {
                if t == Theorem::Pythagoras {
                    continue;
                }
                let o = c.run(t, inst);
                assert_ne!(o.status(), TrialStatus::Fail, "{t} on {inst:?}: {o:?}");
            }
        }
    }

    #[test]
    fn pythagoras_precondition() {
        let c = checker();
        let ok = mul(&[1.0, 1.0], &[1.0, 0.0], &[0.0, 2.0]);
        let o = c.run(Theorem::Pythagoras, &ok);
        assert_eq!(o.status(), TrialStatus::Pass);
        assert!(o.get("residual").unwrap().residual <= 1e-15);
        let bad = mul(&[1.0, 1.0], &[1.0, 0.0], &[1.0, 2.0]);
        let o = c.run(Theorem::Pythagoras, &bad);
        let f = o.first_failure().unwrap();
        assert_eq!(f.name, "precondition");
        assert_eq!(f.residual, 1.0);
    }

    #[test]
    fn asymmetric_family_fails_symmetry() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let sip = Sip::PsdFamily(PsdFamilySip::from_matrices_unchecked(vec![a]).unwrap());
        let inst = Instance::new(sip, lv(&[1.0]), vec![1.0, 2.0], vec![3.0, -1.0]).unwrap();
        let o = checker().run(Theorem::Axioms, &inst);
        // T(x,y) = 0, T(y,x) = 7, |x|ᵀ|A||y| = 6
        let f = o.first_failure().unwrap();
        assert_eq!(f.name, "symmetry");
        assert!((f.residual - 7.0 / (6.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn negative_family_reports_evaluation_or_positivity() {
        let a = -DMatrix::<f64>::identity(2, 2);
        let sip = Sip::PsdFamily(PsdFamilySip::from_matrices_unchecked(vec![a]).unwrap());
        let inst = Instance::new(sip, lv(&[1.0]), vec![1.0, 2.0], vec![3.0, -1.0]).unwrap();
        let c = checker();
        let o = c.run(Theorem::Axioms, &inst);
        assert_eq!(o.first_failure().unwrap().name, "positivity");
        assert!((o.get("positivity").unwrap().residual - 1.0).abs() < 1e-12);
        let o = c.run(Theorem::Cs, &inst);
        assert_eq!(o.first_failure().unwrap().name, "evaluation");
    }

    #[test]
    fn borderline_cone_is_deferred() {
        // T(x,y)·u = −5e−10 against a scale of about 4: inside the band
        let inst = mul(&[1.0], &[1.0], &[-5e-10]);
        let o = checker().run(Theorem::Sharp, &inst);
        let iff = o.get("equality_iff").unwrap();
        assert!(iff.borderline, "{o:?}");
        assert_eq!(o.status(), TrialStatus::Borderline);
    }

    #[test]
    fn checks_are_deterministic() {
        let c = checker();
        let inst = mul(&[2.0, 0.5, 1.0], &[1.0, -2.0, 0.3], &[0.7, 4.0, -1.0]);
        for t in Theorem::ALL {
            assert_eq!(c.run(t, &inst), c.run(t, &inst));
        }
    }
}
