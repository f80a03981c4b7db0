//! Energy measures and the diagnostics built on them.

pub mod defect;
pub mod density;
pub mod energy;
pub mod locus;
pub mod maximal;
pub mod radon;

pub use defect::{defect_decompose, DefectDecomposition, DefectSummary, NOISE_FLOOR};
pub use density::{density_theta, ThetaEstimate};
pub use energy::{monotonicity_report, renormalized_energy, MonotonicityReport, MonotonicityRow};
pub use locus::{cell_key, detect_blowup_locus, grid_cells, BlowupReport, Cell, LocusCell};
pub use maximal::hardy_littlewood_max;
pub use radon::{smoothed_indicator, Metric, RadonMeasureApprox};
