use std::io::Write;
use std::sync::Arc;

use fueter_core::domains::{build_grid, GridKind};
use fueter_core::measures::hardy_littlewood_max;
use fueter_core::regularity::{gaussian_spike, heinz_root_solve, heinz_verify, HeinzConfig, HeinzParams, HeinzRoot, HeinzStatus};
use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::Experiment;
use crate::error::{io_err, Result};
use crate::report::{Check, Outcome};
use crate::Context;

pub const EXPERIMENT: Experiment = Experiment {
    name: "heinz-machinery",
    description: "Heinz root solver, weak-type bound of the maximal function and the spike counterexample",
    params: &["functions", "samples"],
    run,
};

const DELTAS: [f64; 4] = [0.1, 1.0, 5.0, 20.0];

fn run(ctx: &Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let mut out = Outcome::default();

    // t²(1 − ct²) = cε  ⇒  t² = (1 − √(1 − 4c²ε)) / 2c
    let mut worst: f64 = 0.0;
    let mut roots = Vec::new();
    for (c, eps) in [(1.0_f64, 0.01_f64), (1.0, 0.1), (1.0, 0.2), (2.0, 0.05), (0.5, 0.3)] {
        let want = ((1.0 - (1.0 - 4.0 * c * c * eps).sqrt()) / (2.0 * c)).sqrt();
        let got = match heinz_root_solve(2.0, c, eps)? {
            HeinzRoot::Root(t) => t,
            HeinzRoot::NoSmallRoot => f64::NAN,
        };
        let err = (got - want).abs();
        worst = if err.is_nan() { f64::INFINITY } else { worst.max(err) };
        roots.push(json!({ "c": c, "epsilon": eps, "root": got, "closed_form": want }));
    }
    out.record("roots", roots);
    out.check(Check::below("d = 2 root against closed form", worst, 1e-10));

    let functions = cfg.param_usize("functions", 200)?;
    let n = cfg.param_usize("samples", 300)?.max(1);
    let h = 0.01;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = Vec::new();
    writeln!(csv, "function,delta,level_set_measure,bound").unwrap();
    let mut violations = 0usize;
    let mut tightest: f64 = 0.0;
    for k in 0..functions {
        let density = rng.gen_range(0.02..0.5);
        let f: Vec<f64> = (0..n).map(|_| if rng.gen_bool(density) { rng.gen_range(0.0..10.0) } else { 0.0 }).collect();
        let l1: f64 = f.iter().sum::<f64>() * h;
        let m = hardy_littlewood_max(&f, h, 1.0)?;
        for delta in DELTAS {
            let meas = m.iter().filter(|&&v| v >= delta).count() as f64 * h;
            let bound = 4.0 * l1 / delta;
            writeln!(csv, "{k},{delta},{meas},{bound}").unwrap();
            if meas > bound + 1e-12 {
                violations += 1;
            }
            if bound > 0.0 {
                tightest = tightest.max(meas / bound);
            }
        }
    }
    let path = ctx.out_file("weak_type.csv");
    std::fs::write(&path, csv).map_err(io_err(&path))?;
    out.files.push("weak_type.csv".into());
    out.record("weak_type", json!({ "functions": functions, "deltas": DELTAS, "largest_ratio": tightest }));
    out.check(Check::equals("weak-type violations", violations, 0));

    let grid = Arc::new(build_grid(GridKind::Ball3, cfg.grid.h.unwrap_or(1.0 / 32.0), 1.0)?);
    let spike = gaussian_spike(grid, Vector4::zeros(), 50.0, 0.02);
    let params = HeinzParams::new(1.0, 0, 0, 1.0)?;
    let config = HeinzConfig {
        epsilon0: ctx.constants.epsilon0,
        monotonicity_constant: ctx.constants.heinz_monotonicity,
        sup_constant: ctx.constants.heinz_sup,
    };
    let rep = heinz_verify(&spike, &params, &Vector4::zeros(), 0.9, &config)?;
    out.record("spike", &rep);
    out.check(Check::equals("spike status", rep.status, HeinzStatus::HypothesesViolated));
    Ok(out)
}
