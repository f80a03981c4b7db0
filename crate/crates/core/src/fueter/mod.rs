//! The Fueter operator, energy identities and twistor holomorphy.

pub mod energy;
pub mod residual;
pub mod section;
pub mod twistor;

pub use energy::{
    diff_inequality_ratio, energy_identity_residual, pairing_density, total_energy, DiffInequality, EnergyIdentity,
    PAIRING_SIGN,
};
pub use residual::{fueter_residual_3d, fueter_residual_4d, fueter_residual_4d_field, FueterResidualField};
pub use section::{
    density_from, frame_derivatives, AffineMap, DerivativeMode, FnMap, HnsMap, RadialExtension, SectionMap,
    SectionSample,
};
pub use twistor::{radial_extension_residual, twistor_check, twistor_residual, RadialResidual, TwistorReport};
