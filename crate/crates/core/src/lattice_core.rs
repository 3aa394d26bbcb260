//! The concrete Archimedean vector lattice `F = ℝⁿ` with componentwise order.
//!
//! Componentwise multiplication turns the carrier into a semiprime,
//! square-root-closed f-algebra, so every element of the positive cone has a
//! unique positive square root.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute floor used for cone membership and square-root clamping.
pub const DEFAULT_ABS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("entry {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("entry {index} = {value} is not in the positive cone")]
    NotPositive { index: usize, value: f64 },
    #[error("lattice dimension must be positive")]
    EmptyVector,
}

/// An element of the carrier `ℝⁿ`. Serializes as a flat JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LatticeVector(Vec<f64>);

impl TryFrom<Vec<f64>> for LatticeVector {
    type Error = LatticeError;

    fn try_from(entries: Vec<f64>) -> Result<Self, Self::Error> {
        LatticeVector::new(entries)
    }
}

impl From<LatticeVector> for Vec<f64> {
    fn from(v: LatticeVector) -> Self {
        v.0
    }
}

pub(crate) fn check_dims(a: &LatticeVector, b: &LatticeVector) -> Result<(), LatticeError> {
    if a.dim() != b.dim() {
        return Err(LatticeError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

impl LatticeVector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self, LatticeError> {
        if entries.is_empty() {
            return Err(LatticeError::EmptyVector);
        }
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(LatticeError::NonFinite { index, value });
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// The multiplicative unit `1⃗`.
    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, LatticeError> {
        check_dims(self, other)?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&a| f(a)).collect())
    }

    /// Lattice infimum `a ∧ b`.
    pub fn meet(&self, other: &Self) -> Result<Self, LatticeError> {
        self.zip_with(other, f64::min)
    }

    /// Lattice supremum `a ∨ b`.
    pub fn join(&self, other: &Self) -> Result<Self, LatticeError> {
        self.zip_with(other, f64::max)
    }

    /// `|a| = a ∨ (−a)`.
    pub fn abs_val(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn in_positive_cone(&self, tol: f64) -> bool {
        self.0.iter().all(|&a| a >= -tol)
    }

    /// f-algebra product (componentwise).
    pub fn f_mul(&self, other: &Self) -> Result<Self, LatticeError> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Positive square root with the default floor.
    pub fn f_sqrt(&self) -> Result<Self, LatticeError> {
        self.f_sqrt_with_floor(DEFAULT_ABS_FLOOR)
    }

    /// Positive square root. Entries in `[−floor, 0)` are clamped to zero.
    pub fn f_sqrt_with_floor(&self, floor: f64) -> Result<Self, LatticeError> {
        Ok(self.clamp_to_cone(floor)?.map(f64::sqrt))
    }

    /// Replaces entries in `[−floor, 0)` with zero; fails on anything lower.
    pub fn clamp_to_cone(&self, floor: f64) -> Result<Self, LatticeError> {
        if let Some((index, &value)) = self.0.iter().enumerate().find(|(_, &v)| v < -floor) {
            return Err(LatticeError::NotPositive { index, value });
        }
        Ok(self.map(|a| a.max(0.0)))
    }

    pub fn add(&self, other: &Self) -> Result<Self, LatticeError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LatticeError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|a| alpha * a)
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Smallest entry.
    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0.0)
    }

    /// Componentwise `self ≤ other + tol`.
    pub fn le_within(&self, other: &Self, tol: f64) -> Result<bool, LatticeError> {
        check_dims(self, other)?;
        Ok(self.0.iter().zip(&other.0).all(|(&a, &b)| a <= b + tol))
    }
}

impl std::ops::Index<usize> for LatticeVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lv(v: &[f64]) -> LatticeVector {
        LatticeVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn meet_join_examples() {
        assert_eq!(lv(&[1.0, 5.0]).meet(&lv(&[3.0, 2.0])).unwrap(), lv(&[1.0, 2.0]));
        assert_eq!(lv(&[-1.0, 0.0]).meet(&lv(&[0.0, -1.0])).unwrap(), lv(&[-1.0, -1.0]));
        assert_eq!(lv(&[1.0, 5.0]).join(&lv(&[3.0, 2.0])).unwrap(), lv(&[3.0, 5.0]));
        let a = lv(&[0.5, -2.0, 7.0]);
        assert_eq!(a.meet(&a).unwrap(), a);
        assert_eq!(a.join(&a).unwrap(), a);
    }

    #[test]
    fn dimension_mismatch() {
        let err = lv(&[1.0]).meet(&lv(&[1.0, 2.0])).unwrap_err();
        assert_eq!(err, LatticeError::DimensionMismatch { left: 1, right: 2 });
        assert!(lv(&[1.0]).f_mul(&lv(&[1.0, 2.0])).is_err());
        assert!(lv(&[1.0]).join(&lv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(
            LatticeVector::new(vec![1.0, f64::NAN]),
            Err(LatticeError::NonFinite { index: 1, .. })
        ));
        assert!(LatticeVector::new(vec![f64::INFINITY]).is_err());
        assert_eq!(LatticeVector::new(vec![]), Err(LatticeError::EmptyVector));
        assert!(serde_json::from_str::<LatticeVector>("[]").is_err());
    }

    #[test]
    fn abs_examples() {
        assert_eq!(lv(&[-3.0, 4.0]).abs_val(), lv(&[3.0, 4.0]));
        assert_eq!(LatticeVector::zeros(3).abs_val(), LatticeVector::zeros(3));
    }

    #[test]
    fn cone_examples() {
        assert!(lv(&[0.0, 2.0]).in_positive_cone(0.0));
        assert!(lv(&[-1e-12, 1.0]).in_positive_cone(1e-10));
        assert!(!lv(&[-1.0, 1.0]).in_positive_cone(0.0));
    }

    #[test]
    fn f_mul_examples() {
        assert_eq!(lv(&[1.0, 2.0]).f_mul(&lv(&[3.0, 4.0])).unwrap(), lv(&[3.0, 8.0]));
        let a = lv(&[2.5, -1.0]);
        assert_eq!(a.f_mul(&LatticeVector::ones(2)).unwrap(), a);
        assert!(lv(&[1.0, 0.0]).f_mul(&lv(&[0.0, 1.0])).unwrap().is_zero());
    }

    #[test]
    fn f_sqrt_examples() {
        assert_eq!(lv(&[4.0, 9.0]).f_sqrt().unwrap(), lv(&[2.0, 3.0]));
        assert_eq!(LatticeVector::zeros(2).f_sqrt().unwrap(), LatticeVector::zeros(2));
        assert!(matches!(
            lv(&[-1.0, 0.0]).f_sqrt(),
            Err(LatticeError::NotPositive { index: 0, .. })
        ));
        // rounding noise below the floor is clamped
        assert_eq!(lv(&[-1e-13, 4.0]).f_sqrt().unwrap(), lv(&[0.0, 2.0]));
    }

    #[test]
    fn serializes_as_flat_array() {
        let a = lv(&[1.5, -2.0]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[1.5,-2.0]");
        assert_eq!(serde_json::from_str::<LatticeVector>(&s).unwrap(), a);
    }

    #[test]
    fn archimedean_at_desk_scale() {
        let u = lv(&[3.0, 0.25, 1e3, 0.0]);
        let tol = 1e-5 * u.norm_inf();
        let mut inf = u.clone();
        for k in [1u32, 10, 100, 1000, 10_000, 100_000, 1_000_000] {
            inf = inf.meet(&u.scale(1.0 / f64::from(k))).unwrap();
        }
        assert!(inf.in_positive_cone(0.0));
        assert!(inf.norm_inf() <= tol);
    }

    #[test]
    fn semiprime() {
        let z = LatticeVector::zeros(3);
        assert!(z.f_mul(&z).unwrap().is_zero());
        let a = lv(&[1e-150, 0.0, -2.0]);
        assert!(!a.f_mul(&a).unwrap().is_zero());
    }

    fn triple(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        let e = || prop::collection::vec(-1e3f64..1e3, n);
        (e(), e(), e())
    }

    proptest! {
        #[test]
        fn lattice_laws((a, b, c) in (1usize..8).prop_flat_map(triple)) {
            let (a, b, c) = (lv(&a), lv(&b), lv(&c));
            prop_assert_eq!(a.meet(&b).unwrap(), b.meet(&a).unwrap());
            prop_assert_eq!(a.join(&b).unwrap(), b.join(&a).unwrap());
            prop_assert_eq!(
                a.meet(&b).unwrap().meet(&c).unwrap(),
                a.meet(&b.meet(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                a.join(&b).unwrap().join(&c).unwrap(),
                a.join(&b.join(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(a.meet(&a.join(&b).unwrap()).unwrap(), a.clone());
            prop_assert_eq!(a.join(&a.meet(&b).unwrap()).unwrap(), a.clone());
            // duality
            prop_assert_eq!(a.join(&b).unwrap(), a.neg().meet(&b.neg()).unwrap().neg());
            prop_assert_eq!(a.abs_val(), a.join(&a.neg()).unwrap());
            prop_assert_eq!(a.abs_val(), a.neg().abs_val());
        }

        #[test]
        fn f_algebra_disjointness(
            raw in prop::collection::vec((0f64..10.0, 0f64..10.0, 0f64..10.0, any::<bool>()), 1..10)
        ) {
            // u ∧ v = 0 via disjoint supports
            let u = lv(&raw.iter().map(|r| if r.3 { r.0 } else { 0.0 }).collect::<Vec<_>>());
            let v = lv(&raw.iter().map(|r| if r.3 { 0.0 } else { r.1 }).collect::<Vec<_>>());
            let w = lv(&raw.iter().map(|r| r.2).collect::<Vec<_>>());
            prop_assert!(u.meet(&v).unwrap().is_zero());
            prop_assert!(u.f_mul(&w).unwrap().meet(&v).unwrap().is_zero());
            prop_assert!(u.meet(&v.f_mul(&w).unwrap()).unwrap().is_zero());
            prop_assert!(u.f_mul(&w).unwrap().in_positive_cone(0.0));
            prop_assert_eq!(u.f_mul(&w).unwrap(), w.f_mul(&u).unwrap());
        }

        #[test]
        fn semiprime_random(
            a in prop::collection::vec(prop_oneof![Just(0.0), -1e100f64..-1e-100, 1e-100f64..1e100], 1..10)
        ) {
            let a = lv(&a);
            let sq = a.f_mul(&a).unwrap();
            prop_assert_eq!(sq.is_zero(), a.is_zero());
        }

        #[test]
        fn sqrt_squares_back(a in prop::collection::vec(0f64..1e6, 1..10)) {
            let a = lv(&a);
            let r = a.f_sqrt().unwrap();
            prop_assert!(r.in_positive_cone(0.0));
            let sq = r.f_mul(&r).unwrap();
            for i in 0..a.dim() {
                prop_assert!((sq[i] - a[i]).abs() <= 1e-12 * a[i].abs());
            }
        }
    }
}
