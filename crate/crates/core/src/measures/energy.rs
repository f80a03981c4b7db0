use nalgebra::{DVector, Vector4};
use serde::Serialize;

use super::radon::{smoothed_indicator, Metric};
use crate::domains::GridKind;
use crate::error::{input, Result};
use crate::fueter::SectionSample;

fn ball_weight(u: &SectionSample, r: f64) -> f64 {
    u.grid.h.min(0.5 * r)
}

/// `(1/r) ∫_{B_r(x)} |∇u|²`.
pub fn renormalized_energy(u: &SectionSample, x: &Vector4<f64>, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return input(format!("radius must be positive, got {r}"));
    }
    u.grid.check_ball(x, r)?;
    let metric = Metric::for_grid(&u.grid);
    let w = ball_weight(u, r);
    let mut idx = u.grid.ball_indices(x, r + 0.5 * w);
    idx.sort_unstable();
    let s: f64 = idx
        .into_iter()
        .map(|i| u.energy_density[i] * u.grid.weights[i] * smoothed_indicator(metric.distance(x, &u.grid.points[i]), r, w))
        .sum();
    Ok(s / r)
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityRow {
    pub s: f64,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub rows: Vec<MonotonicityRow>,
    /// `true` when the map is asserted to be Fueter, so the identity (not just the inequality) is expected.
    pub identity_expected: bool,
}

impl MonotonicityReport {
    /// Whether `lhs − rhs ≥ −tol·max(|lhs|, |rhs|)` on every row.
    pub fn inequality_holds(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.difference >= -tol * r.lhs.abs().max(r.rhs.abs()))
    }
}

/// Unit tangent at `y` pointing away from `x` (the gradient of `d(x, ·)`), in frame components.
fn radial_components(u: &SectionSample, x: &Vector4<f64>, y: &Vector4<f64>) -> Option<Vec<f64>> {
    let n = match u.grid.kind {
        GridKind::Sphere3 => {
            let t = -(x - y * x.dot(y));
            let nn = t.norm();
            if nn < 1e-14 {
                return None;
            }
            t / nn
        }
        _ => {
            let d = u.grid.displacement(x, y);
            let nn = d.norm();
            if nn < 1e-14 {
                return None;
            }
            d / nn
        }
    };
    Some(u.grid.frame_at(y).iter().map(|v| v.dot(&n)).collect())
}

/// Both sides of `(1/r)∫_{B_r}|du|² − (1/s)∫_{B_s}|du|² = 2∫_{B_r∖B_s} ρ⁻¹|∂_ρ u|²` for all pairs `s < r`.
pub fn monotonicity_report(u: &SectionSample, x: &Vector4<f64>, radii: &[f64], identity_expected: bool) -> Result<MonotonicityReport> {
    if radii.windows(2).any(|w| !(w[0] < w[1])) || radii.first().map_or(true, |&r| r <= 0.0) {
        return input("radii must be positive and strictly ascending");
    }
    let rmax = *radii.last().unwrap();
    u.grid.check_ball(x, rmax)?;
    let metric = Metric::for_grid(&u.grid);
    let f: Vec<f64> = radii.iter().map(|&r| renormalized_energy(u, x, r)).collect::<Result<_>>()?;
    let mut idx = u.grid.ball_indices(x, rmax + u.grid.h);
    idx.sort_unstable();
    // per point: distance, weight and |∂_ρ u|²/ρ
    let mut radial = Vec::with_capacity(idx.len());
    for i in idx {
        let y = u.grid.points[i];
        let rho = metric.distance(x, &y);
        let Some(c) = radial_components(u, x, &y) else { continue };
        let g = u.target.metric_at(u.value(i))?;
        let mut d = DVector::zeros(u.dim);
        for (a, ca) in c.iter().enumerate() {
            d += DVector::from_column_slice(u.frame_derivative(i, a)) * *ca;
        }
        let dr2 = (d.transpose() * &g * &d)[(0, 0)];
        radial.push((rho, u.grid.weights[i], dr2 / rho));
    }
    let mut rows = Vec::new();
    for j in 0..radii.len() {
        for k in (j + 1)..radii.len() {
            let (s, r) = (radii[j], radii[k]);
            let (ws, wr) = (ball_weight(u, s), ball_weight(u, r));
            let rhs: f64 = radial
                .iter()
                .map(|&(rho, w, q)| 2.0 * w * q * (smoothed_indicator(rho, r, wr) - smoothed_indicator(rho, s, ws)))
                .sum();
            let lhs = f[k] - f[j];
            rows.push(MonotonicityRow { s, r, lhs, rhs, difference: lhs - rhs });
        }
    }
    Ok(MonotonicityReport { rows, identity_expected })
}
