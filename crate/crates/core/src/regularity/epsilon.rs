use nalgebra::Vector4;
use serde::Serialize;

use super::heinz::HeinzStatus;
use crate::error::Result;
use crate::fueter::SectionSample;
use crate::measures::renormalized_energy;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EpsilonRegularityReport {
    /// `(1/r)∫_{B_r}|∇u|²`.
    pub epsilon: f64,
    /// `sup_{B_{r/4}} |∇u|²` over grid points.
    pub sup: f64,
    /// `r^{−2}ε + 1`.
    pub bound: f64,
    /// `C·bound − sup`.
    pub margin: f64,
    pub status: HeinzStatus,
}

/// Checks `sup_{B_{r/4}(x)} |∇u|² ≤ C(r^{−2}ε + 1)` whenever `ε ≤ ε₀`.
pub fn epsilon_regularity_check(u: &SectionSample, x: &Vector4<f64>, r: f64, epsilon0: f64, constant: f64) -> Result<EpsilonRegularityReport> {
    let epsilon = renormalized_energy(u, x, r)?;
    let sup = u.grid.ball_indices(x, 0.25 * r).into_iter().map(|i| u.energy_density[i]).fold(0.0, f64::max);
    let bound = epsilon / (r * r) + 1.0;
    let margin = constant * bound - sup;
    let status = if epsilon > epsilon0 {
        HeinzStatus::NotApplicable
    } else if margin >= 0.0 {
        HeinzStatus::Holds
    } else {
        HeinzStatus::BoundViolated
    };
    Ok(EpsilonRegularityReport { epsilon, sup, bound, margin, status })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::domains::{build_grid, GridKind};
    use crate::fueter::AffineMap;
    use crate::hk::flat_quaternion_target;

    fn sample(map: AffineMap) -> SectionSample {
        let g = Arc::new(build_grid(GridKind::Ball3, 1.0 / 16.0, 1.0).unwrap());
        SectionSample::exact(g, Arc::new(flat_quaternion_target(1, false)), Arc::new(map)).unwrap()
    }

    #[test]
    fn constant_map() {
        let u = sample(AffineMap::constant(vec![0.0; 4]));
        let r = epsilon_regularity_check(&u, &Vector4::zeros(), 0.5, 6.0, 1.0).unwrap();
        assert_eq!((r.epsilon, r.sup, r.status), (0.0, 0.0, HeinzStatus::Holds));
    }

    #[test]
    fn linear_fueter_closed_form() {
        let u = sample(AffineMap::linear_fueter());
        for r in [0.25, 0.5] {
            let rep = epsilon_regularity_check(&u, &Vector4::zeros(), r, 6.0, 1.0).unwrap();
            let want = 8.0 * PI / 3.0 * r * r;
            assert!((rep.epsilon - want).abs() < 0.05 * want);
            assert!((rep.sup - 2.0).abs() < 1e-12);
            assert_eq!(rep.status, HeinzStatus::Holds);
        }
        let rep = epsilon_regularity_check(&u, &Vector4::zeros(), 1.0, 6.0, 1.0).unwrap();
        assert_eq!(rep.status, HeinzStatus::NotApplicable);
    }
}
