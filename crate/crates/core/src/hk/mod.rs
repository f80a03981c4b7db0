//! Hyperkähler targets: pointwise structures, charts and sphere maps.

pub mod sphere;
pub mod structure;
pub mod target;

pub use sphere::{
    sphere_scaling, sphere_scaling_point, ConstantSphere, HolomorphicSphere, RiemannPoint, RotatedSphere,
    ScaledSphere, SphereGrid, SphereMap,
};
pub use structure::{complex_structure_from_xi, HkResiduals, HkStructure};
pub use target::{
    eguchi_hanson_target, flat_quaternion_target, sphere_area, sphere_energy, Bolt, EguchiHanson, FlatTarget,
    TargetChart,
};
