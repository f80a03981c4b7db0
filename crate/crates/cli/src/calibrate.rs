//! Calibration of the shipped constants over the built-in test families.
//!
//! `ε₀` is half the smallest renormalized energy seen on the HNS blow-up circle (tail of the
//! sequence, coarsest trusted grid). Every other constant is the largest ratio measured on its
//! families times [`SAFETY`], rounded up to two significant digits.

use std::f64::consts::PI;
use std::sync::Arc;

use fueter_core::bubbles::{conical_deviation, hns_family, AnnulusBump};
use fueter_core::domains::{build_grid, DomainGrid, GridKind, SPHERE3_DEFAULT_EXTENT};
use fueter_core::fueter::{AffineMap, DerivativeMode, SectionMap, SectionSample};
use fueter_core::hk::{eguchi_hanson_target, flat_quaternion_target, TargetChart};
use fueter_core::measures::renormalized_energy;
use fueter_core::regularity::{epsilon_regularity_check, heinz_verify, mean_value_check, GridFunction, HeinzConfig, HeinzParams};
use nalgebra::Vector4;

use crate::constants::{round_down_2, round_up_2, CalibrationRecord, Constants, ConstantsFile, CONSTANTS_SCHEMA_VERSION};
use crate::error::Result;
use crate::experiments::maps::{exp_map, flat_family};

pub const SAFETY: f64 = 1.25;

const CIRCLE_H: f64 = 0.15;
const CIRCLE_RADII: [f64; 2] = [0.2, 0.3];
const CIRCLE_LEVELS: usize = 8;
const CIRCLE_POINTS: usize = 64;

fn ball(h: f64) -> Result<Arc<DomainGrid>> {
    Ok(Arc::new(build_grid(GridKind::Ball3, h, 1.0)?))
}

fn flat() -> Arc<dyn TargetChart> {
    Arc::new(flat_quaternion_target(1, false))
}

fn hns_density(h: f64) -> Result<GridFunction> {
    let eh: Arc<dyn TargetChart> = Arc::new(eguchi_hanson_target(1.0)?);
    let z = eh.holomorphic_spheres()[0].map.clone();
    let g = Arc::new(build_grid(GridKind::Sphere3, h, SPHERE3_DEFAULT_EXTENT)?);
    Ok(GridFunction::energy_density(&hns_family(z, 1.0, g, eh)?))
}

/// Smallest `r^{-1}∫_{B_r}|∇u|²` over points of the circle, the tail of the sequence and the radii.
fn circle_minimum() -> Result<(f64, Vec<usize>)> {
    let eh: Arc<dyn TargetChart> = Arc::new(eguchi_hanson_target(1.0)?);
    let z = eh.holomorphic_spheres()[0].map.clone();
    let g = Arc::new(build_grid(GridKind::Sphere3, CIRCLE_H, SPHERE3_DEFAULT_EXTENT)?);
    // same tail as the locus detection: the second half of i = 0..=levels
    let tail: Vec<usize> = ((CIRCLE_LEVELS + 1) / 2..=CIRCLE_LEVELS).collect();
    let mut lowest = f64::INFINITY;
    for &i in &tail {
        let u = hns_family(z.clone(), 0.5_f64.powi(i as i32), g.clone(), eh.clone())?;
        for k in 0..CIRCLE_POINTS {
            let t = 2.0 * PI * k as f64 / CIRCLE_POINTS as f64;
            let x = Vector4::new(0.0, 0.0, t.cos(), t.sin());
            for r in CIRCLE_RADII {
                lowest = lowest.min(renormalized_energy(&u, &x, r)?);
            }
        }
    }
    Ok((lowest, tail))
}

fn mean_value_ratio() -> Result<f64> {
    let g = ball(1.0 / 16.0)?;
    let mut fns = vec![
        GridFunction::new(g.clone(), |_| 1.0),
        GridFunction::new(g.clone(), |x| 1.0 + x.norm_squared()),
        GridFunction::new(g.clone(), |x| (-x.norm_squared() / 0.09).exp()),
    ];
    for k in 0..3 {
        let u = SectionSample::finite_difference(g.clone(), flat(), flat_family(k, 1.0))?;
        fns.push(GridFunction::energy_density(&u));
    }
    let mut worst: f64 = 0.0;
    for f in &fns {
        for r in [0.25, 0.5] {
            let m = mean_value_check(f, &Vector4::zeros(), r, 1.0)?;
            if m.rhs > 0.0 {
                worst = worst.max(m.lhs / m.rhs);
            }
        }
    }
    let hns = hns_density(0.2)?;
    let m = mean_value_check(&hns, &Vector4::new(0.5, 0.5, 0.5, 0.5), 0.5, 1.0)?;
    Ok(worst.max(m.lhs / m.rhs))
}

/// Largest monotonicity ratio and largest fitted sup constant of the HNS member at two spacings.
fn heinz_ratios() -> Result<(f64, f64)> {
    let x = Vector4::new(0.5, 0.5, 0.5, 0.5);
    let p = HeinzParams::new(1.0, 1, 0, 20.0)?;
    let cfg = HeinzConfig { epsilon0: f64::INFINITY, monotonicity_constant: f64::INFINITY, sup_constant: f64::INFINITY };
    let mut mono: f64 = 0.0;
    let mut fit: f64 = 0.0;
    for h in [0.2, 0.1] {
        let r = heinz_verify(&hns_density(h)?, &p, &x, 0.5, &cfg)?;
        mono = mono.max(r.monotonicity_ratio);
        if r.differential_inequality_holds {
            fit = fit.max(r.fitted_constant);
        }
    }
    Ok((mono, fit))
}

fn epsilon_regularity_ratio() -> Result<f64> {
    let g = ball(1.0 / 16.0)?;
    let mut worst: f64 = 0.0;
    for k in 0..3 {
        let u = SectionSample::finite_difference(g.clone(), flat(), flat_family(k, 1.0))?;
        for r in [0.5, 1.0] {
            let rep = epsilon_regularity_check(&u, &Vector4::zeros(), r, f64::INFINITY, 1.0)?;
            worst = worst.max(rep.sup / rep.bound);
        }
    }
    Ok(worst)
}

fn conical_ratio() -> Result<f64> {
    let g = Arc::new(build_grid(GridKind::Ball3, 1.0 / 16.0, 1.0)?.subset(|p| p.norm() > 1e-12));
    let maps: [Arc<dyn SectionMap>; 3] = [Arc::new(AffineMap::linear_fueter()), Arc::new(exp_map(0.0)), Arc::new(exp_map(0.3))];
    let phi = AnnulusBump { r0: 0.2, r1: 0.45 };
    let mut worst: f64 = 0.0;
    for m in maps {
        let u = SectionSample::new(g.clone(), flat(), m, DerivativeMode::Exact)?;
        let c = conical_deviation(&u, &phi, 2.0)?;
        if c.rhs_bound > 0.0 {
            worst = worst.max(c.lhs / c.rhs_bound);
        }
    }
    Ok(worst)
}

/// Runs every calibration family; deterministic.
pub fn calibrate() -> Result<ConstantsFile> {
    let (circle, levels) = circle_minimum()?;
    let epsilon0 = round_down_2(0.5 * circle);
    let mean = mean_value_ratio()?;
    let (mono, fit) = heinz_ratios()?;
    let eps_reg = epsilon_regularity_ratio()?;
    let conical = conical_ratio()?;
    Ok(ConstantsFile {
        schema_version: CONSTANTS_SCHEMA_VERSION,
        constants: Constants {
            epsilon0,
            mean_value: round_up_2(SAFETY * mean),
            heinz_monotonicity: round_up_2(SAFETY * mono),
            heinz_sup: round_up_2(SAFETY * fit),
            epsilon_regularity: round_up_2(SAFETY * eps_reg),
            conical: round_up_2(SAFETY * conical),
        },
        calibration: CalibrationRecord {
            safety_factor: SAFETY,
            circle_grid_h: CIRCLE_H,
            circle_radii: CIRCLE_RADII.to_vec(),
            circle_levels: levels,
            circle_min_renormalized: circle,
            mean_value_max_ratio: mean,
            heinz_max_monotonicity_ratio: mono,
            heinz_max_fitted: fit,
            epsilon_regularity_max_fitted: eps_reg,
            conical_max_ratio: conical,
        },
    })
}
