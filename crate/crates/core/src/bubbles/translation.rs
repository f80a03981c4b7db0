use nalgebra::{DVector, Vector3};

use crate::domains::{GeneralizedCube, GridKind};
use crate::error::{input, Result};
use crate::fueter::SectionSample;
use crate::measures::smoothed_indicator;

/// `sup_s (1/s)∫_{Q_{s,L}} |∂_v u|²` over `s = L, L/2, L/4, …` down to twice the grid spacing,
/// with `Q_{s,L}` the cylinder of half-length `s` along `v` and radius `L` centred at the origin.
pub fn translation_deficit(u: &SectionSample, v: &Vector3<f64>, l: f64) -> Result<f64> {
    Ok(translation_profile(u, v, l)?.into_iter().map(|(_, q)| q).fold(0.0, f64::max))
}

/// The table `(s, (1/s)∫_{Q_{s,L}} |∂_v u|²)` behind [`translation_deficit`].
pub fn translation_profile(u: &SectionSample, v: &Vector3<f64>, l: f64) -> Result<Vec<(f64, f64)>> {
    if u.grid.kind != GridKind::Ball3 {
        return input("translation deficit is defined on ball3 samples");
    }
    if !(l > 0.0) {
        return input("cylinder radius must be positive");
    }
    let cube = GeneralizedCube::new(Vector3::zeros(), Vector3::zeros(), *v, l, l)?;
    let room = u.grid.max_radius(&nalgebra::Vector4::zeros());
    if cube.circumradius() > room + 1e-12 {
        return input(format!("cube of circumradius {} exits the domain of radius {room}", cube.circumradius()));
    }
    let dir = cube.direction;
    let h = u.grid.h;
    let dv2: Vec<f64> = (0..u.len())
        .map(|i| {
            let mut d = DVector::zeros(u.dim);
            for a in 0..3 {
                d += DVector::from_column_slice(u.frame_derivative(i, a)) * dir[a];
            }
            let g = u.target.metric_at(u.value(i))?;
            Ok((d.transpose() * g * &d)[(0, 0)])
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut s = l;
    while s >= 2.0 * h {
        let mut total = 0.0;
        for (i, p) in u.grid.points.iter().enumerate() {
            let x = p.xyz();
            let t = x.dot(&dir);
            let rho = (x - dir * t).norm();
            let w = smoothed_indicator(t.abs(), s, h) * smoothed_indicator(rho, l, h);
            if w > 0.0 {
                total += w * u.grid.weights[i] * dv2[i];
            }
        }
        out.push((s, total / s));
        s *= 0.5;
    }
    Ok(out)
}
