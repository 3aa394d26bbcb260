//! Vector semi-inner products valued in a vector lattice, the lattice means
//! `⊠` and `⊞`, the seminorms `‖x‖ᵀᵤ = T(x, x) ⊠ u`, and a randomized
//! verification harness for the inequalities and identities they satisfy.
//!
//! The carrier lattice is `ℝⁿ` with the componentwise order and product.

pub mod cauchy_schwarz;
pub mod harness;
pub mod lattice_core;
pub mod lattice_means;
pub mod seminorms;
pub mod sip;

pub use lattice_core::{LatticeError, LatticeVector};
pub use lattice_means::{box_plus, box_times, AngleGrid, ThetaGrid};
pub use sip::{Instance, Sip};
