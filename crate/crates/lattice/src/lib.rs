//! Beauville–Bogomolov–Fujiki lattice arithmetic in exact rationals:
//! forms, periods, short-vector enumeration and the finite set of
//! bubbling directions ξ allowed by an area bound.

mod directions;
mod enumerate;
mod error;
mod form;
mod period;
pub mod rational;
mod text;

pub use directions::{
    admissible_directions, admissible_directions_with, class_decomposition, majorant, majorant_gram, planted_u3,
    ClassDecomposition, DirectionEntry, DirectionSet, SquareFilter,
};
pub use enumerate::{brute_force_short_vectors, cholesky_box, enumerate_short_vectors, seeded_form};
pub use error::{Error, Result};
pub use form::{bbf_eval, BBFLattice};
pub use period::Period;
pub use rational::Q;
pub use text::{LatticeFile, PeriodSpec};
