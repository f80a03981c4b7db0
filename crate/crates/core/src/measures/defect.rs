use serde::Serialize;

use super::radon::RadonMeasureApprox;
use crate::error::{input, Result};
use crate::fueter::SectionSample;

/// Relative level below which defect atoms are treated as discretization noise.
pub const NOISE_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct DefectDecomposition {
    pub absolutely_continuous: RadonMeasureApprox,
    pub nu: RadonMeasureApprox,
    /// Grid indices carrying defect mass.
    pub support: Vec<usize>,
    pub noise_floor: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectSummary {
    pub mu_mass: f64,
    pub ac_mass: f64,
    pub nu_mass: f64,
    pub support_cells: usize,
    pub noise_floor: f64,
}

impl DefectDecomposition {
    pub fn summary(&self, mu: &RadonMeasureApprox) -> DefectSummary {
        DefectSummary {
            mu_mass: mu.total_mass(),
            ac_mass: self.absolutely_continuous.total_mass(),
            nu_mass: self.nu.total_mass(),
            support_cells: self.support.len(),
            noise_floor: self.noise_floor,
        }
    }
}

/// `μ = |∇u|² dvol + ν` cell by cell, `ν = max(μ − |∇u|² dvol, 0)` above the noise floor.
pub fn defect_decompose(mu_limit: &RadonMeasureApprox, u_limit: &SectionSample) -> Result<DefectDecomposition> {
    if mu_limit.atoms.len() != u_limit.len() {
        return input("μ and the limit map must share one grid");
    }
    let floor = NOISE_FLOOR * mu_limit.total_mass() / u_limit.len().max(1) as f64;
    let grid = u_limit.grid.clone();
    let mut ac = Vec::with_capacity(u_limit.len());
    let mut nu = Vec::with_capacity(u_limit.len());
    let mut support = Vec::new();
    for i in 0..u_limit.len() {
        let p = grid.points[i];
        let a = u_limit.energy_density[i] * grid.weights[i];
        let mut d = (mu_limit.atoms[i].1 - a).max(0.0);
        if d < floor {
            d = 0.0;
        } else {
            support.push(i);
        }
        ac.push((p, a));
        nu.push((p, d));
    }
    Ok(DefectDecomposition {
        absolutely_continuous: RadonMeasureApprox::on_grid(grid.clone(), ac, "absolutely continuous part"),
        nu: RadonMeasureApprox::on_grid(grid, nu, "defect measure"),
        support,
        noise_floor: floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{build_grid, GridKind};
    use crate::fueter::AffineMap;
    use crate::hk::flat_quaternion_target;
    use std::sync::Arc;

    #[test]
    fn self_decomposition_has_no_defect() {
        let g = Arc::new(build_grid(GridKind::Ball3, 0.1, 1.0).unwrap());
        let u = SectionSample::exact(g, Arc::new(flat_quaternion_target(1, false)), Arc::new(AffineMap::linear_fueter())).unwrap();
        let mu = RadonMeasureApprox::from_sample(&u, "mu");
        let d = defect_decompose(&mu, &u).unwrap();
        assert!(d.nu.total_mass() < 0.01 * mu.total_mass());
    }

    #[test]
    fn recovers_planted_circle_masses() {
        let g = Arc::new(build_grid(GridKind::Ball3, 0.05, 1.0).unwrap());
        let u = SectionSample::exact(g.clone(), Arc::new(flat_quaternion_target(1, false)), Arc::new(AffineMap::linear_fueter())).unwrap();
        let mut mu = RadonMeasureApprox::from_sample(&u, "mu");
        let mut planted = 0.0;
        for (i, p) in g.points.iter().enumerate() {
            let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if (rho - 0.5).abs() < 0.026 && p[2].abs() < 0.026 {
                mu.atoms[i].1 += 0.01;
                planted += 0.01;
            }
        }
        let d = defect_decompose(&mu, &u).unwrap();
        assert!(planted > 0.0);
        assert!((d.nu.total_mass() - planted).abs() < 0.02 * planted);
    }
}
