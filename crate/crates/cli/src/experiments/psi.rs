use std::io::Write;

use fueter_core::domains::psi_endomorphism;
use nalgebra::DMatrix;

use super::Experiment;
use crate::error::{input, io_err, Result};
use crate::report::{Check, Outcome};
use crate::Context;

pub const EXPERIMENT: Experiment = Experiment {
    name: "psi-spectrum",
    description: "spectrum {1, −3} of Ψ on Hom(ℍⁿ, ℍⁿ) and its minimal polynomial",
    params: &["n"],
    run,
};

fn run(ctx: &Context) -> Result<Outcome> {
    let n = ctx.config.param_usize("n", 1)?;
    if !(1..=4).contains(&n) {
        return input(format!("params.n must be in 1..=4, got {n}"));
    }
    let p = psi_endomorphism(n);
    let dim = 16 * n;
    let eig = p.complex_eigenvalues();
    let mut re: Vec<f64> = eig.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    let imag = eig.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    let ones = re.iter().filter(|v| (**v - 1.0).abs() < 1e-6).count();
    let threes = re.iter().filter(|v| (**v + 3.0).abs() < 1e-6).count();
    let dev = re.iter().fold(0.0_f64, |m, v| m.max((v - 1.0).abs().min((v + 3.0).abs()))).max(imag);
    let id = DMatrix::<f64>::identity(dim, dim);
    let minpoly = ((&p - &id) * (&p + &id * 3.0)).norm();

    let mut out = Outcome::default();
    let path = ctx.out_file("eigenvalues.csv");
    let mut csv = Vec::new();
    writeln!(csv, "index,real,imag").unwrap();
    let mut sorted: Vec<_> = eig.iter().collect();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for (i, z) in sorted.iter().enumerate() {
        writeln!(csv, "{i},{},{}", z.re, z.im).unwrap();
    }
    std::fs::write(&path, csv).map_err(io_err(&path))?;
    out.files.push("eigenvalues.csv".into());
    out.record("n", n);
    out.record("trace", p.trace());
    out.record("minimal_polynomial_residual", minpoly);
    out.check(Check::equals("multiplicities [1, −3]", [ones, threes], [12 * n, 4 * n]));
    out.check(Check::below("eigenvalue deviation", dev, 1e-9));
    out.check(Check::below("‖(Ψ−1)(Ψ+3)‖", minpoly, 1e-9));
    Ok(out)
}
