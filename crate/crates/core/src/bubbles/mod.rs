//! The HNS blow-up family, rescaling, bubble extraction and tangent-cone diagnostics.

pub mod cone;
pub mod extract;
pub mod hns;
pub mod rescale;
pub mod translation;

pub use cone::{
    balancing_boundary_functional, balancing_deficit, conical_deviation, tangent_cone, AffineField, AnnulusBump,
    BoundaryFunctional, ConeRay, ConicalDeviation, TangentConeSample, TestWeight, VectorField, CONICAL_CONSTANT,
};
pub use extract::{
    estimate_tangent_direction, extract_at_locus_point, extract_bubble, extract_bubble_with, normal_basis, BubbleMap, BubbleOutcome,
    BubbleParams, BubbleReport, ScaleChoice,
};
pub use hns::{circle_cells, compare_with_circle, hns_family, hns_sequence, tube_fraction, LocusComparison};
pub use rescale::{exp_at, exp_differential, log_at, max_rescale, rescale_map, PullbackMap};
pub use translation::{translation_deficit, translation_profile};
