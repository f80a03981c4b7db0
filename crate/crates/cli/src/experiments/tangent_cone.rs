use std::f64::consts::PI;
use std::sync::Arc;

use fueter_core::bubbles::{balancing_deficit, conical_deviation, AnnulusBump, TangentConeSample, TestWeight};
use fueter_core::domains::{build_grid, GridKind};
use fueter_core::fueter::{AffineMap, DerivativeMode, RadialExtension, SectionSample};
use nalgebra::Vector3;
use serde_json::json;

use super::maps::ConeProfile;
use super::Experiment;
use crate::error::Result;
use crate::report::{Check, Outcome};
use crate::Context;

pub const EXPERIMENT: Experiment = Experiment {
    name: "tangent-cone",
    description: "balancing deficit of model cones and conical deviation of a degree-0 homogeneous map",
    params: &["theta", "stretch"],
    run,
};

fn weighted_energy(u: &SectionSample, phi: &AnnulusBump) -> f64 {
    u.grid.points.iter().zip(&u.grid.weights).zip(&u.energy_density).map(|((p, w), e)| w * phi.value(&p.xyz()) * e).sum()
}

fn run(ctx: &Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let theta = cfg.param_f64("theta", 2.5)?;
    let big_r = cfg.param_f64("stretch", 2.0)?;
    let mut out = Outcome::default();

    let two = TangentConeSample::new(vec![(Vector3::x(), 1.5), (-Vector3::x(), 1.5)])?;
    let three: Vec<_> = (0..3)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / 3.0;
            (Vector3::new(a.cos(), a.sin(), 0.0), 0.7)
        })
        .collect();
    let three = TangentConeSample::new(three)?;
    let one = TangentConeSample::new(vec![(Vector3::z(), theta)])?;
    let (d2, d3, d1) = (balancing_deficit(&two), balancing_deficit(&three), balancing_deficit(&one));
    out.record("deficits", json!({ "antipodal_pair": d2, "planar_triple": d3, "single_ray": d1, "theta": theta }));
    out.check(Check::below("antipodal pair deficit", d2, 1e-12));
    out.check(Check::below("planar triple deficit", d3, 1e-12));
    out.check(Check::below("single ray |deficit − θ|", (d1 - theta).abs(), 1e-12));

    let h = cfg.grid.h.unwrap_or(1.0 / 16.0);
    let extent = cfg.grid.extent.unwrap_or(1.0);
    let grid = Arc::new(build_grid(GridKind::Ball3, h, extent)?.subset(|p| p.norm() > 1e-12));
    let target = cfg.target_chart("flat-h")?;
    let phi = AnnulusBump { r0: 0.2, r1: 0.45 };
    let cone = SectionSample::new(grid.clone(), target.clone(), Arc::new(RadialExtension { z: Arc::new(ConeProfile) }), DerivativeMode::Exact)?;
    let c = conical_deviation(&cone, &phi, big_r)?;
    let scale = weighted_energy(&cone, &phi);
    let rel = c.lhs / scale;
    let lin = SectionSample::new(grid, target, Arc::new(AffineMap::linear_fueter()), DerivativeMode::Exact)?;
    let l = conical_deviation(&lin, &phi, big_r)?;
    let bound_ok = l.lhs <= ctx.constants.conical * l.rhs_bound * (1.0 + 1e-9);
    out.record("conical_map", json!({ "lhs": c.lhs, "rhs_bound": c.rhs_bound, "weighted_energy": scale }));
    out.record("linear_fueter", json!({ "lhs": l.lhs, "rhs_bound": l.rhs_bound, "ratio": l.lhs / l.rhs_bound }));
    out.check(Check::below("conical map deviation (relative)", rel, 1e-3));
    out.check(Check::equals("linear Fueter deviation within C·bound", bound_ok, true));
    Ok(out)
}
