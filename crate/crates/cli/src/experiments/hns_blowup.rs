use std::io::Write;
use std::sync::Arc;

use fueter_core::bubbles::{compare_with_circle, extract_at_locus_point, hns_family, hns_sequence, tube_fraction, BubbleOutcome, BubbleParams};
use fueter_core::domains::{build_grid, geodesic_distance_to_blowup_circle, GridKind, SPHERE3_DEFAULT_EXTENT};
use fueter_core::fueter::total_energy;
use fueter_core::hk::ConstantSphere;
use fueter_core::measures::{defect_decompose, detect_blowup_locus, RadonMeasureApprox};
use nalgebra::Vector4;
use serde_json::json;

use super::Experiment;
use crate::error::{input, io_err, Result};
use crate::report::{Check, Outcome};
use crate::Context;

pub const EXPERIMENT: Experiment = Experiment {
    name: "hns-blowup",
    description: "HNS sequence on S³: blow-up locus, energy, defect measure tube and bubble extraction",
    params: &["locus_point", "off_locus_point", "tube_cells", "tangent_radius"],
    run,
};

fn point(cfg: &crate::ExperimentConfig, key: &str, default: [f64; 4]) -> Result<Vector4<f64>> {
    let v = cfg.param_vec(key, &default)?;
    if v.len() != 4 {
        return input(format!("params.{key} must have four entries"));
    }
    let p = Vector4::new(v[0], v[1], v[2], v[3]);
    if (p.norm() - 1.0).abs() > 1e-9 {
        return input(format!("params.{key} must lie on the unit sphere"));
    }
    Ok(p)
}

fn outcome_json(o: &BubbleOutcome) -> serde_json::Value {
    match o {
        BubbleOutcome::Bubble(b) => json!({
            "outcome": "bubble",
            "base_point": b.base_point,
            "recentered_point": b.recentered_point,
            "tangent_direction": b.tangent_direction,
            "bubble_energy": b.bubble_energy,
            "antiholomorphy_residual": b.antiholomorphy_residual,
            "relative_residual": b.relative_residual,
            "theta_at_x": b.theta_at_x,
            "capture_fraction": b.capture_fraction,
            "sphere_map": b.sphere_map,
            "scales": b.scales,
        }),
        BubbleOutcome::NoBubble { reason } => json!({ "outcome": "no_bubble", "reason": reason }),
    }
}

fn run(ctx: &Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let h = cfg.grid.h.unwrap_or(0.15);
    let extent = cfg.grid.extent.unwrap_or(SPHERE3_DEFAULT_EXTENT);
    let cell = cfg.grid.cell_size.unwrap_or(0.1);
    let levels = cfg.sequence.levels.unwrap_or(8);
    if levels < 2 {
        return input("sequence.levels must be at least 2");
    }
    let radii = cfg.thresholds.radii.clone().unwrap_or_else(|| vec![0.2, 0.3]);
    let eps0 = ctx.constants.epsilon0;
    let tube = cfg.param_f64("tube_cells", 8.0)? * h;
    let tangent_radius = cfg.param_f64("tangent_radius", 0.9)?;
    let on = point(cfg, "locus_point", [0.0, 0.0, 1.0, 0.0])?;
    let off = point(cfg, "off_locus_point", [1.0, 0.0, 0.0, 0.0])?;

    let target = cfg.target_chart("eguchi-hanson")?;
    let Some(sphere) = target.holomorphic_spheres().first().cloned() else {
        return input(format!("target {} has no holomorphic sphere", target.name()));
    };
    let grid = Arc::new(build_grid(GridKind::Sphere3, h, extent)?);
    let seq = hns_sequence(sphere.map.clone(), levels, grid.clone(), target.clone())?;
    let mut out = Outcome::default();

    let energies: Vec<f64> = seq.iter().map(total_energy).collect();
    let emax = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let emin = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let variation = (emax - emin) / emin;
    out.record("energies", &energies);
    out.check(Check::below("energy variation across λ", variation, 0.1));

    let report = detect_blowup_locus(&seq, eps0, &radii, cell)?;
    let cmp = compare_with_circle(&report, &grid);
    let path = ctx.out_file("locus.csv");
    let mut csv = Vec::new();
    writeln!(csv, "k0,k1,k2,k3,x0,x1,x2,x3,min_renormalized,theta,circle_distance").unwrap();
    for c in &report.cells {
        let p = Vector4::from_column_slice(&c.probe);
        let [k0, k1, k2, k3] = c.key;
        let [x0, x1, x2, x3] = c.probe;
        let d = geodesic_distance_to_blowup_circle(&p);
        writeln!(csv, "{k0},{k1},{k2},{k3},{x0},{x1},{x2},{x3},{},{},{d}", c.min_renormalized, c.theta).unwrap();
    }
    std::fs::write(&path, csv).map_err(io_err(&path))?;
    out.files.push("locus.csv".into());
    out.record(
        "locus",
        json!({
            "cells": report.cells.len(),
            "cells_tested": report.cells_tested,
            "cells_skipped": report.cells_skipped,
            "tail_start": report.tail_start,
            "radii": report.radii_used,
            "cell_size": report.cell_size,
            "comparison": cmp,
        }),
    );
    // a cell of side c in ℝ⁴ has diameter 2c
    out.check(Check::at_most("largest locus distance to the circle / cell diameter", cmp.max_probe_distance / (2.0 * cell), 1.0));
    out.check(Check::at_least("circle cells covered", cmp.coverage, 0.9));

    let last = seq.last().expect("nonempty sequence");
    let mu = RadonMeasureApprox::from_sample(last, "energy measure of the last sample");
    let constant: Arc<dyn fueter_core::hk::SphereMap> = Arc::new(ConstantSphere { value: sphere.map.eval(&nalgebra::Vector3::z()) });
    let limit = hns_family(constant, 1.0, grid.clone(), target.clone())?;
    let defect = defect_decompose(&mu, &limit)?;
    let nu = &defect.nu;
    let nu_total = nu.total_mass();
    let nu_tube: f64 = nu.atoms.iter().filter(|(x, _)| geodesic_distance_to_blowup_circle(x) <= tube).map(|(_, m)| m).sum();
    let nu_fraction = if nu_total > 0.0 { nu_tube / nu_total } else { 0.0 };
    out.record("defect", defect.summary(&mu));
    out.record("tube", json!({ "radius": tube, "nu_fraction": nu_fraction, "mu_fraction_last": tube_fraction(last, tube) }));
    out.check(Check::at_least("ν mass in the tube", nu_fraction, 0.9));

    let params = BubbleParams::default();
    let x = report
        .cells
        .iter()
        .map(|c| Vector4::from_column_slice(&c.probe))
        .min_by(|a, b| (a - on).norm().total_cmp(&(b - on).norm()))
        .unwrap_or(on);
    let found = extract_at_locus_point(&seq, nu, &x, eps0, tangent_radius, &params)?;
    let path = ctx.out_file("bubble.csv");
    let mut csv = Vec::new();
    match found.bubble() {
        Some(b) => {
            b.bubble.write_csv(&mut csv).map_err(io_err(&path))?;
            out.check(Check::below("bubble anti-holomorphy residual (relative L²)", b.relative_residual, 0.05));
            out.check(Check::at_most("bubble energy / Θ(x)", b.bubble_energy / b.theta_at_x, 1.15));
        }
        None => {
            writeln!(csv, "x,y,z").unwrap();
            out.check(Check::equals("bubble found at the locus point", false, true));
        }
    }
    std::fs::write(&path, csv).map_err(io_err(&path))?;
    out.files.push("bubble.csv".into());
    out.record("bubble", outcome_json(&found));

    let none = extract_at_locus_point(&seq, nu, &off, eps0, tangent_radius, &params)?;
    out.record("off_locus", json!({ "point": [off[0], off[1], off[2], off[3]], "result": outcome_json(&none) }));
    out.check(Check::equals("off-locus point returns no bubble", none.bubble().is_none(), true));
    Ok(out)
}
