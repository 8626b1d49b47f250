//! Computations in the universal cover of PSL(2,R) for punctured-surface representations.

pub mod audit;
pub mod constructors;
pub mod cover;
pub mod curves;
pub mod error;
pub mod mobius;
pub mod sampling;
pub mod scalar;
pub mod selftest;
pub mod surface;
pub mod word;

pub use cover::{angle_lift, special_lift, CoverClass, LiftMode};
pub use error::{Error, Result};
pub use mobius::{axes_cross, conjugator, fixed_directions, normalize, FixedDirections, PslType};
pub use audit::{audit_rep, check_restrictions, negative_control, AuditReport, DEFAULT_MARGIN};
pub use constructors::{build_rep, sample, solve_commutator, solve_product, BuildRequest, FactorKind};
pub use curves::{canonical_form, enumerate_scc, CurveWord, McgAuto};
pub use scalar::Scalar;
pub use surface::{mw_bounds, MwVerdict, Representation, Surface};
pub use word::{Generator, Letter, Word};

pub type Matrix = mobius::Matrix2<f64>;
pub type Psl = mobius::ProjectiveMatrix<f64>;
pub type Cover = cover::CoverElement<f64>;
pub type Matrix32 = mobius::Matrix2<f32>;
pub type Psl32 = mobius::ProjectiveMatrix<f32>;
pub type Cover32 = cover::CoverElement<f32>;
