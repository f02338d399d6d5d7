//! Permutationally invariant two-body Bell inequalities for `n` parties with two
//! dichotomic measurements each.
//!
//! The crate covers the whole pipeline:
//!
//! - [`polytope`]: the symmetrized local polytope, whose vertices are the images of the
//!   boundary strategy tuples `(a, b, c, d)` with `abcd = 0`, and exact minimisation of
//!   linear functionals over it.
//! - [`inequalities`]: the parametric inequality families, closed-form classical bounds,
//!   saturating vertices and the affine-rank tightness test.
//! - [`bell_operator`]: the Schur–Weyl blocks of the Bell operator (real symmetric
//!   pentadiagonal matrices) and the search for maximal quantum violation.
//! - [`states`]: symmetric states in the Dicke basis, Gaussian superpositions, reduced
//!   two-body states and the Dicke-state violations.
//! - [`robustness`]: collective-spin form of an inequality and the visibility/offset
//!   error model on second moments.
//! - [`oracle`] (feature `oracle`): brute-force `2^n` references used to cross-check
//!   everything above.
//!
//! Classical quantities are computed with arbitrary-precision integers and rationals;
//! floating point only enters through the quantum side.

#![forbid(unsafe_code)]

pub mod bell_operator;
pub mod eigen;
pub mod inequalities;
pub mod optimize;
pub mod par;
pub mod polytope;
pub mod rational;
pub mod robustness;
pub mod states;

#[cfg(feature = "oracle")]
pub mod oracle;

pub use bell_operator::{BellBlock, MeasurementPair, OperatorConstants, TwiceSpin};
pub use inequalities::{BellInequality, ClassParams, Sign};
pub use par::ExecMode;
pub use polytope::{StrategyTuple, SymmetricCorrelators};
pub use states::SymmetricState;
