use std::io::Write;
use std::sync::Arc;

use fueter_core::domains::{build_grid, GridKind};
use fueter_core::fueter::{fueter_residual_3d, twistor_check, DerivativeMode, RadialExtension, SectionSample};
use nalgebra::Vector4;
use serde_json::json;

use super::{orders, Experiment};
use crate::error::{input, io_err, Result};
use crate::report::{Check, Outcome};
use crate::Context;

pub const EXPERIMENT: Experiment = Experiment {
    name: "twistor-check",
    description: "twistor ∂̄-residual of the Eguchi–Hanson bolt and convergence of its radial extension residual",
    params: &["sphere_nodes", "refinements", "pole_cutoff"],
    run,
};

fn run(ctx: &Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let chart = cfg.target_chart("eguchi-hanson")?;
    let Some(sphere) = chart.holomorphic_spheres().first().cloned() else {
        return input(format!("target {} has no holomorphic sphere", chart.name()));
    };
    let nodes = cfg.param_usize("sphere_nodes", 64)?;
    let levels = cfg.param_usize("refinements", 3)?.max(2);
    let cutoff = cfg.param_f64("pole_cutoff", 0.9)?;
    let h0 = cfg.grid.h.unwrap_or(0.125);
    let mut out = Outcome::default();

    let tw = twistor_check(chart.clone(), sphere.map.clone(), &sphere.xi, nodes)?;
    out.record("twistor", &tw);
    out.record("sphere", json!({ "label": sphere.label, "xi": [sphere.xi.x, sphere.xi.y, sphere.xi.z], "area": sphere.area }));
    out.check(Check::below("bolt twistor residual", tw.sphere_residual, 1e-6));

    // fixed annulus 1 ≤ |x| ≤ 2, finite-difference step halved; the angle chart of the bolt is
    // singular at its poles p₁ = ±1
    let annulus = build_grid(GridKind::Ball3, h0, 2.0)?.subset(|x: &Vector4<f64>| {
        let r = x.xyz().norm();
        (1.0..=2.0).contains(&r) && (x.x / r).abs() <= cutoff
    });
    let annulus = Arc::new(annulus);
    let map = Arc::new(RadialExtension { z: sphere.map.clone() });
    let exact = SectionSample::new(annulus.clone(), chart.clone(), map.clone(), DerivativeMode::Exact)?;
    let fe = fueter_residual_3d(&exact)?;
    let l2 = |norms: &[f64]| norms.iter().zip(&annulus.weights).map(|(n, w)| n * n * w).sum::<f64>().sqrt();
    let mut csv = Vec::new();
    writeln!(csv, "step,points,exact_l2,fd_l2,max_difference").unwrap();
    let mut errs = Vec::new();
    let mut rows = Vec::new();
    for k in 0..levels {
        let step = h0 / 2f64.powi(k as i32);
        let fd = SectionSample::new(annulus.clone(), chart.clone(), map.clone(), DerivativeMode::FiniteDifference { step })?;
        let ff = fueter_residual_3d(&fd)?;
        let mut diff: f64 = 0.0;
        for i in 0..fd.len() {
            let d: f64 = fe.vector(i).iter().zip(ff.vector(i)).map(|(a, b)| (a - b) * (a - b)).sum();
            diff = diff.max(d.sqrt());
        }
        let (el, fl) = (l2(&fe.norms), l2(&ff.norms));
        writeln!(csv, "{step},{},{el},{fl},{diff}", fd.len()).unwrap();
        rows.push(json!({ "step": step, "points": fd.len(), "exact_l2": el, "fd_l2": fl, "max_difference": diff }));
        errs.push(diff);
    }
    let path = ctx.out_file("radial.csv");
    std::fs::write(&path, csv).map_err(io_err(&path))?;
    out.files.push("radial.csv".into());
    let ord = orders(&errs);
    let min_order = ord.iter().cloned().fold(f64::INFINITY, f64::min);
    out.record("radial_extension", json!({ "rows": rows, "orders": ord }));
    out.check(Check::at_least("radial extension residual order", min_order, 1.8));
    Ok(out)
}
