use std::f64::consts::PI;

use nalgebra::Vector4;
use serde::Serialize;

use super::function::GridFunction;
use crate::error::Result;

/// Default constant in `f(x) ≤ C(r^{−n}∫_{B_r} f + r²‖Δf‖_∞)`; the sharp value for the volume
/// term is `1/|B₁|`, which is `3/(4π)` in three dimensions and `2/π²` in four.
pub const MEAN_VALUE_CONSTANT: f64 = 0.25;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeanValueReport {
    pub lhs: f64,
    pub volume_term: f64,
    pub laplacian_term: f64,
    pub rhs: f64,
    pub constant: f64,
    pub holds: bool,
}

/// `f(x)` against `r^{−n}∫_{B_r(x)} f + r² max_{B_r} |Δf|`, the Laplacian by centred differences
/// with the grid spacing as step.
pub fn mean_value_check(f: &GridFunction, x: &Vector4<f64>, r: f64, constant: f64) -> Result<MeanValueReport> {
    f.grid.check_ball(x, r)?;
    let n = f.dimension();
    let lhs = f.eval(x)?;
    let volume_term = r.powf(-n) * f.ball_integral(x, r);
    let h = f.grid.h;
    let mut lap: f64 = 0.0;
    for i in f.ball(x, r) {
        lap = lap.max(f.laplacian(&f.grid.points[i], h)?.abs());
    }
    let laplacian_term = r * r * lap;
    let rhs = volume_term + laplacian_term;
    Ok(MeanValueReport { lhs, volume_term, laplacian_term, rhs, constant, holds: lhs <= constant * rhs * (1.0 + 1e-9) })
}

/// Volume of the unit ball in dimension `n ∈ {3, 4}`.
pub fn unit_ball_volume(n: f64) -> f64 {
    if n == 4.0 {
        0.5 * PI * PI
    } else {
        4.0 * PI / 3.0
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domains::{build_grid, GridKind};

    fn grid() -> Arc<crate::domains::DomainGrid> {
        Arc::new(build_grid(GridKind::Ball3, 1.0 / 16.0, 1.0).unwrap())
    }

    #[test]
    fn constant_function() {
        let f = GridFunction::new(grid(), |_| 2.0);
        let m = mean_value_check(&f, &Vector4::zeros(), 0.5, MEAN_VALUE_CONSTANT).unwrap();
        assert_eq!(m.lhs, 2.0);
        assert!((m.volume_term - 2.0 * unit_ball_volume(3.0)).abs() < 0.03 * m.volume_term);
        assert!(m.laplacian_term.abs() < 1e-9);
        assert!(m.holds);
    }

    #[test]
    fn linear_and_quadratic() {
        let f = GridFunction::new(grid(), |x| 2.0 + x[0] + 0.5 * x[1]);
        let m = mean_value_check(&f, &Vector4::new(0.1, 0.0, 0.0, 0.0), 0.5, MEAN_VALUE_CONSTANT).unwrap();
        assert!(m.laplacian_term < 1e-8);
        assert!(m.holds);
        let q = GridFunction::new(grid(), |x| x.norm_squared());
        assert!((q.laplacian(&Vector4::new(0.2, 0.1, 0.0, 0.0), 1.0 / 16.0).unwrap() - 6.0).abs() < 1e-8);
        let m = mean_value_check(&q, &Vector4::new(0.3, 0.0, 0.0, 0.0), 0.5, MEAN_VALUE_CONSTANT).unwrap();
        assert!((m.laplacian_term - 1.5).abs() < 1e-6);
        assert!(m.holds);
    }

    #[test]
    fn ball_must_fit() {
        let f = GridFunction::new(grid(), |_| 1.0);
        assert!(mean_value_check(&f, &Vector4::new(0.8, 0.0, 0.0, 0.0), 0.5, 1.0).is_err());
    }
}
