//! Prime fields, elliptic-curve groups, and curve profiles.
//!
//! Everything downstream of this module computes in two related structures:
//! a scalar field `F_p` (`p` = group order) and a point group of a
//! short-Weierstrass curve `y^2 = x^3 + ax + b` over a base field `F_q`.
//! Moduli are runtime values — profiles are loadable from config files —
//! so field arithmetic is Montgomery multiplication over a fixed-capacity
//! little-endian limb array with a per-field context carrying the
//! precomputed constants.
//!
//! Two profiles are built in:
//!
//! * `TEST` — a deliberately tiny curve (331 points over `F_307`) whose
//!   group can be enumerated exhaustively in tests and whose scalar field
//!   is small enough for χ²-style distribution checks.
//! * `MAIN` — the P-192 parameters (prime order ≈ 2¹⁹²), used for all
//!   soundness-bearing runs.

mod field;
pub(crate) mod limbs;
mod curve;
mod profile;

pub use curve::{CurveGroup, GroupPoint};
pub use field::{FieldElement, PrimeField};
pub use limbs::Limbs;
pub use limbs::from_u64 as limbs_from_u64;
pub use profile::{CurveProfile, ProfileId};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("point is not on the curve")]
    PointNotOnCurve,
    #[error("modulus must be an odd prime greater than 2 (got an even or tiny value)")]
    BadModulus,
    #[error("value does not fit below the modulus / non-canonical encoding")]
    NonCanonical,
    #[error("centered value exceeds the field's representable range")]
    CenteredOverflow,
    #[error("profile is invalid: {0}")]
    BadProfile(String),
    #[error("encoded point/scalar is malformed: {0}")]
    BadEncoding(String),
}
