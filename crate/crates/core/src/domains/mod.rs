//! Source manifolds: flat balls and tori, the round S³ with its left-invariant frame,
//! the Hopf fibration, and the Ψ endomorphism of flat `ℝ⁴`.

pub mod cube;
pub mod grid;
pub mod hopf;
pub mod index;
pub mod psi;

pub use cube::GeneralizedCube;
pub use grid::{build_grid, DomainGrid, GridKind, SPHERE3_DEFAULT_EXTENT};
pub use hopf::{distance_to_blowup_circle, geodesic_distance_to_blowup_circle, hopf_differential, hopf_map, hopf_point};
pub use index::SpatialIndex;
pub use psi::{iota, psi_apply, psi_endomorphism};
