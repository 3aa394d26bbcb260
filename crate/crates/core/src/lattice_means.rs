//! Geometric mean `u ⊠ v` and square mean `a ⊞ b` on the componentwise carrier.
//!
//! Each mean comes in two forms: the closed form (`√(uv)`, `√(a²+b²)`) and a
//! finite-sample realization of the defining infimum/supremum over a
//! parameter grid. Sampling an infimum over-estimates it and sampling a
//! supremum under-estimates it, so the two forms sandwich each other.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice_core::{check_dims, LatticeError, LatticeVector, DEFAULT_ABS_FLOOR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid is empty")]
    Empty,
    #[error("grid bounds must satisfy 0 < lo <= hi (got lo={lo}, hi={hi})")]
    BadBounds { lo: f64, hi: f64 },
    #[error("grid points must be finite and strictly increasing")]
    NotIncreasing,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Log-spaced samples of `θ ∈ (0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaGrid {
    points: Vec<f64>,
}

/// Parameters of a log-spaced positive grid, as they appear in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGridParams {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

pub(crate) fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, GridError> {
    if count == 0 {
        return Err(GridError::Empty);
    }
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(GridError::BadBounds { lo, hi });
    }
    if count == 1 || lo == hi {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (count - 1) as f64;
    let mut pts: Vec<f64> = (0..count).map(|i| (a + step * i as f64).exp()).collect();
    pts[0] = lo;
    pts[count - 1] = hi;
    pts.dedup();
    Ok(pts)
}

pub(crate) fn check_increasing(points: &[f64], positive: bool) -> Result<(), GridError> {
    if points.is_empty() {
        return Err(GridError::Empty);
    }
    let ok = points.iter().all(|p| p.is_finite() && (!positive || *p > 0.0))
        && points.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(GridError::NotIncreasing)
    }
}

impl ThetaGrid {
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self, GridError> {
        Ok(Self {
            points: log_spaced(lo, hi, count)?,
        })
    }

    pub fn from_params(p: LogGridParams) -> Result<Self, GridError> {
        Self::log_spaced(p.lo, p.hi, p.count)
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self, GridError> {
        check_increasing(&points, true)?;
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self::log_spaced(1e-8, 1e8, 10_000).expect("default grid is valid")
    }
}

/// Samples of the angle `θ ∈ [0, 2π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    points: Vec<f64>,
}

impl AngleGrid {
    /// `count` uniform angles on `[0, 2π]` merged with the axis angles
    /// `{0, π/2, π, 3π/2, 2π}`.
    pub fn full(count: usize) -> Result<Self, GridError> {
        Self::uniform_with_axes(0.0, TAU, count, &[0.0, FRAC_PI_2, PI, 1.5 * PI, TAU])
    }

    /// The quarter circle `[0, π/2]`, enough for arguments in the positive cone.
    pub fn quarter(count: usize) -> Result<Self, GridError> {
        Self::uniform_with_axes(0.0, FRAC_PI_2, count, &[0.0, FRAC_PI_2])
    }

    fn uniform_with_axes(lo: f64, hi: f64, count: usize, axes: &[f64]) -> Result<Self, GridError> {
        if count == 0 {
            return Err(GridError::Empty);
        }
        let mut pts: Vec<f64> = if count == 1 {
            vec![lo]
        } else {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count).map(|i| lo + step * i as f64).collect()
        };
        pts.extend_from_slice(axes);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Ok(Self { points: pts })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self, GridError> {
        check_increasing(&points, false)?;
        Ok(Self { points })
    }

    /// Points of this grid that lie in `[lo, hi]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self, GridError> {
        let points: Vec<f64> = self
            .points
            .iter()
            .copied()
            .filter(|&t| t >= lo && t <= hi)
            .collect();
        Self::from_points(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self::full(4096).expect("default grid is valid")
    }
}

/// Closed-form geometric mean `√(uᵢvᵢ)`.
///
/// Both arguments must lie in the positive cone; entries within
/// [`DEFAULT_ABS_FLOOR`] below zero are treated as zero.
pub fn box_times(u: &LatticeVector, v: &LatticeVector) -> Result<LatticeVector, LatticeError> {
    box_times_with_floor(u, v, DEFAULT_ABS_FLOOR)
}

pub fn box_times_with_floor(
    u: &LatticeVector,
    v: &LatticeVector,
    floor: f64,
) -> Result<LatticeVector, LatticeError> {
    let u = u.clamp_to_cone(floor)?;
    let v = v.clamp_to_cone(floor)?;
    check_dims(&u, &v)?;
    Ok(LatticeVector::from_raw(
        u.as_slice()
            .iter()
            .zip(v.as_slice())
            .map(|(&a, &b)| geometric_mean(a, b))
            .collect(),
    ))
}

/// `√(ab)` for `a, b ≥ 0` without spurious overflow or underflow.
pub(crate) fn geometric_mean(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_normal() {
        p.sqrt()
    } else {
        a.sqrt() * b.sqrt()
    }
}

/// Result of a grid realization of `⊠`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaOracle {
    pub value: LatticeVector,
    /// Components whose minimizer `θ* = √(vᵢ/uᵢ)` lies outside the grid
    /// bounds; for these the over-estimate does not shrink under refinement.
    pub out_of_range: Vec<usize>,
}

/// `½·min_θ (θuᵢ + θ⁻¹vᵢ)` over the grid.
pub fn box_times_oracle(
    u: &LatticeVector,
    v: &LatticeVector,
    grid: &ThetaGrid,
) -> Result<ThetaOracle, MeanError> {
    let u = u.clamp_to_cone(DEFAULT_ABS_FLOOR)?;
    let v = v.clamp_to_cone(DEFAULT_ABS_FLOOR)?;
    check_dims(&u, &v)?;
    let mut out_of_range = Vec::new();
    let mut value = Vec::with_capacity(u.dim());
    for (i, (&a, &b)) in u.as_slice().iter().zip(v.as_slice()).enumerate() {
        let best = grid
            .points()
            .iter()
            .map(|&t| t * a + b / t)
            .fold(f64::INFINITY, f64::min);
        value.push(0.5 * best);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        let in_range = a > 0.0 && b > 0.0 && {
            let t = (b / a).sqrt();
            t >= grid.lo() && t <= grid.hi()
        };
        if !in_range {
            out_of_range.push(i);
        }
    }
    Ok(ThetaOracle {
        value: LatticeVector::from_raw(value),
        out_of_range,
    })
}

/// Closed-form square mean `√(aᵢ² + bᵢ²)`. Arguments may have any sign.
pub fn box_plus(a: &LatticeVector, b: &LatticeVector) -> Result<LatticeVector, LatticeError> {
    check_dims(a, b)?;
    Ok(LatticeVector::from_raw(
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(&x, &y)| x.hypot(y))
            .collect(),
    ))
}

/// `maxθ (cos θ·aᵢ + sin θ·bᵢ)` over the grid.
pub fn box_plus_oracle(
    a: &LatticeVector,
    b: &LatticeVector,
    grid: &AngleGrid,
) -> Result<LatticeVector, MeanError> {
    check_dims(a, b)?;
    let trig: Vec<(f64, f64)> = grid.points().iter().map(|t| (t.cos(), t.sin())).collect();
    Ok(LatticeVector::from_raw(
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(&x, &y)| {
                trig.iter()
                    .map(|&(c, s)| c * x + s * y)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lv(v: &[f64]) -> LatticeVector {
        LatticeVector::new(v.to_vec()).unwrap()
    }

    fn rel_close(a: &LatticeVector, b: &LatticeVector, rel: f64) -> bool {
        let scale = a.norm_inf().max(b.norm_inf()) + 1e-300;
        a.sub(b).unwrap().norm_inf() <= rel * scale
    }

    #[test]
    fn box_times_examples() {
        assert_eq!(box_times(&lv(&[1.0, 4.0]), &lv(&[4.0, 1.0])).unwrap(), lv(&[2.0, 2.0]));
        assert!(box_times(&lv(&[3.0, 7.0]), &LatticeVector::zeros(2)).unwrap().is_zero());
        let r = box_times(&lv(&[2.0, 3.0]), &lv(&[5.0, 7.0])).unwrap();
        // 10⁴-point log grid oracle, frozen
        let oracle = box_times_oracle(
            &lv(&[2.0, 3.0]),
            &lv(&[5.0, 7.0]),
            &ThetaGrid::log_spaced(1e-4, 1e4, 10_000).unwrap(),
        )
        .unwrap();
        assert!((r[0] - 3.16227766).abs() < 1e-8);
        assert!((r[1] - 4.58257569).abs() < 1e-8);
        assert!(rel_close(&r, &oracle.value, 1e-6));
    }

    #[test]
    fn box_times_rejects_negative() {
        assert!(box_times(&lv(&[-1.0]), &lv(&[1.0])).is_err());
        assert!(box_times(&lv(&[1.0]), &lv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn theta_oracle_examples() {
        let g = ThetaGrid::log_spaced(1e-4, 1e4, 4001).unwrap();
        let o = box_times_oracle(&lv(&[1.0, 4.0]), &lv(&[4.0, 1.0]), &g).unwrap();
        assert!(o.out_of_range.is_empty());
        // worst case for log step h is a relative over-estimate of cosh(h/2) − 1
        let h = (1e4f64 / 1e-4).ln() / 4000.0;
        let bound = 2.0 * ((0.5 * h).cosh() - 1.0);
        assert!(bound < 6e-6);
        for i in 0..2 {
            assert!(o.value[i] >= 2.0 && o.value[i] - 2.0 <= bound);
        }

        let o = box_times_oracle(&lv(&[1.0]), &lv(&[1e10]), &g).unwrap();
        // true value 1e5; minimizer at θ=1e5 is outside the grid
        assert_eq!(o.out_of_range, vec![0]);
        assert!(o.value[0] > 1e5 * (1.0 + 1e-3));

        let u = lv(&[3.0, 0.5]);
        let o = box_times_oracle(&u, &LatticeVector::zeros(2), &g).unwrap();
        assert_eq!(o.value, u.scale(0.5 * 1e-4));
        assert_eq!(o.out_of_range, vec![0, 1]);
    }

    #[test]
    fn grid_errors() {
        assert_eq!(ThetaGrid::log_spaced(1.0, 2.0, 0), Err(GridError::Empty));
        assert!(matches!(ThetaGrid::log_spaced(0.0, 2.0, 5), Err(GridError::BadBounds { .. })));
        assert!(matches!(ThetaGrid::log_spaced(3.0, 2.0, 5), Err(GridError::BadBounds { .. })));
        assert_eq!(ThetaGrid::from_points(vec![]), Err(GridError::Empty));
        assert_eq!(ThetaGrid::from_points(vec![2.0, 1.0]), Err(GridError::NotIncreasing));
        assert_eq!(AngleGrid::full(0), Err(GridError::Empty));
    }

    #[test]
    fn grid_shapes() {
        let g = ThetaGrid::log_spaced(1e-8, 1e8, 10_000).unwrap();
        assert_eq!(g.count(), 10_000);
        assert_eq!((g.lo(), g.hi()), (1e-8, 1e8));
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
        let a = AngleGrid::full(4096).unwrap();
        assert_eq!(a.points()[0], 0.0);
        assert_eq!(*a.points().last().unwrap(), TAU);
        for axis in [FRAC_PI_2, PI, 1.5 * PI] {
            assert!(a.points().contains(&axis));
        }
        let q = AngleGrid::quarter(100).unwrap();
        assert_eq!(*q.points().last().unwrap(), FRAC_PI_2);
    }

    #[test]
    fn box_plus_examples() {
        assert_eq!(box_plus(&lv(&[3.0, 0.0]), &lv(&[4.0, 0.0])).unwrap(), lv(&[5.0, 0.0]));
        assert_eq!(box_plus(&lv(&[-2.0, 1.0]), &LatticeVector::zeros(2)).unwrap(), lv(&[2.0, 1.0]));
        let r = box_plus(&lv(&[1.0, 2.0]), &lv(&[2.0, 2.0])).unwrap();
        assert!(rel_close(&r, &lv(&[5f64.sqrt(), 8f64.sqrt()]), 1e-15));
        let o = box_plus_oracle(&lv(&[1.0, 2.0]), &lv(&[2.0, 2.0]), &AngleGrid::default()).unwrap();
        assert!(rel_close(&r, &o, 1e-6));
    }

    #[test]
    fn angle_oracle_examples() {
        let g = AngleGrid::full(4096).unwrap();
        let o = box_plus_oracle(&lv(&[3.0, 0.0]), &lv(&[4.0, 0.0]), &g).unwrap();
        assert!((o[0] - 5.0).abs() <= 1e-5 && o[0] <= 5.0);
        assert_eq!(o[1], 0.0);
        let z = LatticeVector::zeros(3);
        assert!(box_plus_oracle(&z, &z, &g).unwrap().is_zero());
        // axis angles make a ⊞ 0 = |a| exact
        let a = lv(&[-2.0, 1.5, 0.0]);
        assert_eq!(box_plus_oracle(&a, &z, &g).unwrap(), a.abs_val());
    }

    #[test]
    fn quarter_circle_matches_full_on_cone() {
        let g = AngleGrid::full(4096).unwrap();
        let q = g.restrict(0.0, FRAC_PI_2).unwrap();
        let a = lv(&[1.0, 0.0, 7.5, 0.001]);
        let b = lv(&[2.0, 3.0, 0.0, 900.0]);
        let full = box_plus_oracle(&a, &b, &g).unwrap();
        let quarter = box_plus_oracle(&a, &b, &q).unwrap();
        assert!(full.sub(&quarter).unwrap().norm_inf() <= 1e-12);
    }

    #[test]
    fn prop23_spot_checks() {
        // (1+3)⊠3 = √12 = (1⊠3)⊞(3⊠3) = √3⊞3
        let lhs = box_times(&lv(&[4.0]), &lv(&[3.0])).unwrap();
        let rhs = box_plus(&lv(&[3f64.sqrt()]), &lv(&[3.0])).unwrap();
        assert!((lhs[0] - 12f64.sqrt()).abs() < 1e-15);
        assert!((rhs[0] - 12f64.sqrt()).abs() < 1e-14);
        let a = lv(&[2.0, 0.3]);
        let b = lv(&[5.0, 1.1]);
        let l = box_times(&a.scale(4.0), &b).unwrap();
        let r = box_times(&a, &b).unwrap().scale(2.0);
        assert!(rel_close(&l, &r, 1e-15));
    }

    fn pos_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0f64..1e3, n)
    }

    fn any_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, n)
    }

    proptest! {
        #[test]
        fn sandwich_theta((u, v) in (1usize..6).prop_flat_map(|n| (pos_vec(n), pos_vec(n))), count in 2usize..300) {
            let (u, v) = (lv(&u), lv(&v));
            let g = ThetaGrid::log_spaced(1e-3, 1e3, count).unwrap();
            let closed = box_times(&u, &v).unwrap();
            let o = box_times_oracle(&u, &v, &g).unwrap();
            for i in 0..u.dim() {
                prop_assert!(closed[i] <= o.value[i] * (1.0 + 1e-15) + 1e-300);
            }
        }

        #[test]
        fn sandwich_angle((a, b) in (1usize..6).prop_flat_map(|n| (any_vec(n), any_vec(n))), count in 1usize..300) {
            let (a, b) = (lv(&a), lv(&b));
            let g = AngleGrid::full(count).unwrap();
            let closed = box_plus(&a, &b).unwrap();
            let o = box_plus_oracle(&a, &b, &g).unwrap();
            for i in 0..a.dim() {
                prop_assert!(o[i] <= closed[i] * (1.0 + 1e-15));
            }
        }

        #[test]
        fn commutative_and_diagonal((a, b) in (1usize..6).prop_flat_map(|n| (pos_vec(n), any_vec(n)))) {
            let (a, b) = (lv(&a), lv(&b));
            prop_assert_eq!(box_times(&a, &a.abs_val()).unwrap(), box_times(&a.abs_val(), &a).unwrap());
            prop_assert!(rel_close(&box_times(&a, &a).unwrap(), &a, 1e-12));
            prop_assert_eq!(box_plus(&a, &b).unwrap(), box_plus(&b, &a).unwrap());
            prop_assert!(rel_close(&box_plus(&b, &b).unwrap(), &b.abs_val().scale(2f64.sqrt()), 1e-12));
            prop_assert!(box_plus(&a, &b).unwrap().in_positive_cone(0.0));
        }

        #[test]
        fn biadditivity_and_homogeneity(
            (a, b, c) in (1usize..6).prop_flat_map(|n| (pos_vec(n), pos_vec(n), pos_vec(n))),
            lambda in 0f64..100.0,
        ) {
            let (a, b, c) = (lv(&a), lv(&b), lv(&c));
            let l = box_times(&a.add(&b).unwrap(), &c).unwrap();
            let r = box_plus(&box_times(&a, &c).unwrap(), &box_times(&b, &c).unwrap()).unwrap();
            prop_assert!(rel_close(&l, &r, 1e-10));
            let l = box_times(&a, &b.add(&c).unwrap()).unwrap();
            let r = box_plus(&box_times(&a, &b).unwrap(), &box_times(&a, &c).unwrap()).unwrap();
            prop_assert!(rel_close(&l, &r, 1e-10));
            let base = box_times(&a, &b).unwrap().scale(lambda.sqrt());
            prop_assert!(rel_close(&box_times(&a.scale(lambda), &b).unwrap(), &base, 1e-10));
            prop_assert!(rel_close(&box_times(&a, &b.scale(lambda)).unwrap(), &base, 1e-10));
        }

        #[test]
        fn refinement_does_not_increase_gap(
            (u, v) in (1usize..5).prop_flat_map(|n| (prop::collection::vec(1e-3f64..1e3, n), prop::collection::vec(1e-3f64..1e3, n))),
            count in 2usize..200,
        ) {
            // 2G−1 points on the same bounds contain the G-point grid
            let (u, v) = (lv(&u), lv(&v));
            let coarse = ThetaGrid::log_spaced(1e-4, 1e4, count).unwrap();
            let fine = ThetaGrid::log_spaced(1e-4, 1e4, 2 * count - 1).unwrap();
            let closed = box_times(&u, &v).unwrap();
            let gc = box_times_oracle(&u, &v, &coarse).unwrap().value.sub(&closed).unwrap();
            let gf = box_times_oracle(&u, &v, &fine).unwrap().value.sub(&closed).unwrap();
            for i in 0..u.dim() {
                prop_assert!(gf[i] <= gc[i] + 1e-12 * closed[i].max(1.0));
            }
        }
    }
}
