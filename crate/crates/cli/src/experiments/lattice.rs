use std::io::Write;

use bbf_lattice::{
    admissible_directions, brute_force_short_vectors, class_decomposition, enumerate_short_vectors, planted_u3, seeded_form,
    BBFLattice, DirectionSet, Period, Q,
};
use serde_json::json;

use super::Experiment;
use crate::error::{input, io_err, Result};
use crate::report::{Check, Outcome};
use crate::Context;

pub const EXPERIMENT: Experiment = Experiment {
    name: "lattice-directions",
    description: "short-vector enumeration against brute force, the planted U³ class and the K3 lattice",
    params: &["forms", "sigma", "k3_directions", "k3_a_max"],
    run,
};

fn parse_q(key: &str, s: &str) -> Result<Q> {
    s.trim().parse::<Q>().map_err(|_| crate::CliError::Input(format!("params.{key}: `{s}` is not a fraction")))
}

fn write_directions(w: &mut Vec<u8>, label: &str, set: &DirectionSet) {
    for e in &set.entries {
        let g: Vec<String> = e.gamma.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{label},{},{},{},{},{},{},{}", set.a_max, e.xi[0], e.xi[1], e.xi[2], e.area, e.square, g.join(" ")).unwrap();
    }
}

fn run(ctx: &Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let forms = cfg.param_usize("forms", 20)?;
    let sigma = cfg.param_usize("sigma", 2)? as i64;
    let mut out = Outcome::default();

    let mut mismatched = Vec::new();
    let mut rows = Vec::new();
    for k in 0..forms as u64 {
        let seed = cfg.seed.wrapping_add(k);
        let (g, bound) = seeded_form(seed);
        let fp = enumerate_short_vectors(&g, &bound)?;
        let bf = brute_force_short_vectors(&g, &bound)?;
        if fp != bf {
            mismatched.push(seed);
        }
        rows.push(json!({ "seed": seed, "rank": g.len(), "bound": bound.to_string(), "vectors": fp.len() }));
    }
    out.record("seeded_forms", rows);
    out.check(Check::equals("enumeration differs from brute force (seeds)", mismatched, vec![]));

    let mut csv = Vec::new();
    writeln!(csv, "instance,a_max,xi0,xi1,xi2,area,square,gamma").unwrap();
    let (l, p, g0) = planted_u3();
    let xi0 = class_decomposition(&l, &p, &g0)?.xi.expect("planted class has a direction");
    let one = admissible_directions(&l, &p, &Q::from_integer(1.into()), sigma)?;
    let half = admissible_directions(&l, &p, &parse_q("a_max", "1/2")?, sigma)?;
    write_directions(&mut csv, "planted", &one);
    let found: Vec<[f64; 3]> = one.entries.iter().map(|e| e.xi).collect();
    out.record("planted", json!({ "gamma": g0, "xi": xi0, "a_max_1": one, "a_max_half": half.len() }));
    out.check(Check::equals("planted directions at A_max = 1", found, vec![xi0]));
    out.check(Check::equals("planted directions at A_max = 1/2", half.len(), 0));

    let k3 = BBFLattice::k3();
    out.check(Check::equals("K3 signature", [k3.signature.0, k3.signature.1], [3, 19]));
    if cfg.param_bool("k3_directions", false)? {
        let a_max = parse_q("k3_a_max", &cfg.param_str("k3_a_max", "1/2")?)?;
        if a_max <= Q::from_integer(0.into()) {
            return input("params.k3_a_max must be positive");
        }
        let period = Period::generic(&k3, cfg.seed)?;
        let set = admissible_directions(&k3, &period, &a_max, sigma)?;
        write_directions(&mut csv, "k3-generic", &set);
        out.record("k3_generic", json!({ "period_seed": cfg.seed, "a_max": set.a_max, "candidates": set.candidates, "directions": set.len() }));
    }
    let path = ctx.out_file("directions.csv");
    std::fs::write(&path, csv).map_err(io_err(&path))?;
    out.files.push("directions.csv".into());
    Ok(out)
}
