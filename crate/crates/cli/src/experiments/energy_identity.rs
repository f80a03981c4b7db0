use std::io::Write;
use std::sync::Arc;

use fueter_core::domains::{build_grid, GridKind};
use fueter_core::fueter::{energy_identity_residual, AffineMap, DerivativeMode, SectionMap, SectionSample};
use serde_json::json;

use super::maps::{exp_map, polynomial_map};
use super::{orders, Experiment};
use crate::error::{io_err, Result};
use crate::report::{Check, Outcome};
use crate::Context;

pub const EXPERIMENT: Experiment = Experiment {
    name: "energy-identity",
    description: "pointwise |du|² = |Fu|² + pairing on flat test maps; finite-difference convergence order",
    params: &["refinements"],
    run,
};

fn run(ctx: &Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let h = cfg.grid.h.unwrap_or(0.1);
    let extent = cfg.grid.extent.unwrap_or(0.5);
    let levels = cfg.param_usize("refinements", 3)?.max(2);
    let target = cfg.target_chart("flat-h")?;
    let mut out = Outcome::default();

    let exact: [(&str, Arc<dyn SectionMap>); 3] = [
        ("linear-fueter", Arc::new(AffineMap::linear_fueter())),
        ("linear-identity", Arc::new(AffineMap::linear_identity())),
        ("exp", Arc::new(exp_map(0.3))),
    ];
    let grid = Arc::new(build_grid(GridKind::Ball3, h, extent)?);
    let mut worst: f64 = 0.0;
    let mut per_map = serde_json::Map::new();
    for (name, map) in &exact {
        let u = SectionSample::new(grid.clone(), target.clone(), map.clone(), DerivativeMode::Exact)?;
        let r = energy_identity_residual(&u)?.max_abs_residual();
        per_map.insert((*name).into(), json!(r));
        worst = worst.max(r);
    }
    out.record("exact_max_residual", &per_map);
    out.check(Check::below("exact-mode max residual", worst, 1e-10));

    let fd: [(&str, Arc<dyn SectionMap>); 2] = [("exp", Arc::new(exp_map(0.3))), ("polynomial", Arc::new(polynomial_map()))];
    let csv_path = ctx.out_file("convergence.csv");
    let mut csv = Vec::new();
    writeln!(csv, "map,h,points,max_residual").unwrap();
    let mut fd_rows = serde_json::Map::new();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (name, map) in &fd {
        let mut errs = Vec::new();
        for k in 0..levels {
            let hk = h / 2f64.powi(k as i32);
            let g = Arc::new(build_grid(GridKind::Ball3, hk, extent)?);
            let u = SectionSample::finite_difference(g, target.clone(), map.clone())?;
            let e = energy_identity_residual(&u)?.max_abs_residual();
            writeln!(csv, "{name},{hk},{},{e}", u.len()).unwrap();
            errs.push(e);
        }
        let ord = orders(&errs);
        for o in &ord {
            lo = lo.min(*o);
            hi = hi.max(*o);
        }
        fd_rows.insert((*name).into(), json!({ "max_residual": errs, "orders": ord }));
    }
    std::fs::write(&csv_path, csv).map_err(io_err(&csv_path))?;
    out.files.push("convergence.csv".into());
    out.record("finite_difference", &fd_rows);
    out.check(Check::within("finite-difference order (min)", lo, 1.8, 2.2));
    out.check(Check::within("finite-difference order (max)", hi, 1.8, 2.2));
    Ok(out)
}
