use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use fueter_core::domains::{build_grid, GridKind};
use fueter_core::fueter::{AffineMap, SectionSample};
use fueter_core::measures::monotonicity_report;
use nalgebra::Vector4;

use super::Experiment;
use crate::error::{input, io_err, Result};
use crate::report::{Check, Outcome};
use crate::Context;

pub const EXPERIMENT: Experiment = Experiment {
    name: "flat-monotonicity",
    description: "monotonicity identity for the linear Fueter map against (8π/3)(r² − s²)",
    params: &["tolerance"],
    run,
};

fn run(ctx: &Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let h = cfg.grid.h.unwrap_or(1.0 / 16.0);
    let extent = cfg.grid.extent.unwrap_or(1.0);
    let radii = cfg.thresholds.radii.clone().unwrap_or_else(|| vec![0.25, 0.5]);
    if radii.len() < 2 {
        return input("flat-monotonicity needs at least two radii");
    }
    let tol = cfg.param_f64("tolerance", 0.05)?;
    let grid = Arc::new(build_grid(GridKind::Ball3, h, extent)?);
    let u = SectionSample::exact(grid, cfg.target_chart("flat-h")?, Arc::new(AffineMap::linear_fueter()))?;
    let rep = monotonicity_report(&u, &Vector4::zeros(), &radii, true)?;

    let mut out = Outcome::default();
    let path = ctx.out_file("monotonicity.csv");
    let mut csv = Vec::new();
    writeln!(csv, "s,r,lhs,rhs,closed_form").unwrap();
    let mut worst: f64 = 0.0;
    for row in &rep.rows {
        let exact = 8.0 * PI / 3.0 * (row.r * row.r - row.s * row.s);
        writeln!(csv, "{},{},{},{},{exact}", row.s, row.r, row.lhs, row.rhs).unwrap();
        worst = worst.max((row.lhs - exact).abs() / exact).max((row.rhs - exact).abs() / exact);
    }
    std::fs::write(&path, csv).map_err(io_err(&path))?;
    out.files.push("monotonicity.csv".into());
    out.record("rows", &rep.rows);
    out.record("max_relative_error", worst);
    out.check(Check::at_most("lhs and rhs against closed form (relative)", worst, tol));
    Ok(out)
}
