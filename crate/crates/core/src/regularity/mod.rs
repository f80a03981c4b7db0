//! Mean-value inequality, the Heinz root analysis and sup-bound verifier, and ε-regularity.

pub mod epsilon;
pub mod function;
pub mod heinz;
pub mod mean_value;

pub use epsilon::{epsilon_regularity_check, EpsilonRegularityReport};
pub use function::GridFunction;
pub use heinz::{
    gaussian_spike, heinz_root_solve, heinz_verify, HeinzConfig, HeinzParams, HeinzReport, HeinzRoot, HeinzStatus,
};
pub use mean_value::{mean_value_check, unit_ball_volume, MeanValueReport, MEAN_VALUE_CONSTANT};
