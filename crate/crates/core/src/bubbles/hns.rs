use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::Vector4;
use serde::Serialize;

use crate::domains::{geodesic_distance_to_blowup_circle, DomainGrid, GridKind};
use crate::error::{input, Result};
use crate::fueter::{HnsMap, SectionSample};
use crate::hk::{SphereMap, TargetChart};
use crate::measures::{cell_key, grid_cells, BlowupReport};

/// `u_λ = z ∘ s_λ ∘ π` sampled with closed-form derivatives on a sphere3 grid.
pub fn hns_family(
    z: Arc<dyn SphereMap>,
    lambda: f64,
    grid: Arc<DomainGrid>,
    target: Arc<dyn TargetChart>,
) -> Result<SectionSample> {
    if !(lambda > 0.0) {
        return input(format!("λ must be positive, got {lambda}"));
    }
    if grid.kind != GridKind::Sphere3 {
        return input("the HNS family lives on sphere3");
    }
    SectionSample::exact(grid, target, Arc::new(HnsMap { z, lambda }))
}

/// `u_{λ_i}` for `λ_i = 2^{−i}`, `i = 0..=levels`.
pub fn hns_sequence(
    z: Arc<dyn SphereMap>,
    levels: usize,
    grid: Arc<DomainGrid>,
    target: Arc<dyn TargetChart>,
) -> Result<Vec<SectionSample>> {
    (0..=levels).map(|i| hns_family(z.clone(), 0.5_f64.powi(i as i32), grid.clone(), target.clone())).collect()
}

/// Fraction of the energy of `u` within geodesic distance `rho` of the blow-up circle.
pub fn tube_fraction(u: &SectionSample, rho: f64) -> f64 {
    let mut inside = 0.0;
    let mut total = 0.0;
    for (i, p) in u.grid.points.iter().enumerate() {
        let m = u.energy_density[i] * u.grid.weights[i];
        total += m;
        if geodesic_distance_to_blowup_circle(p) <= rho {
            inside += m;
        }
    }
    if total > 0.0 {
        inside / total
    } else {
        0.0
    }
}

/// Keys of the grid cells that contain a point of the blow-up circle.
pub fn circle_cells(grid: &DomainGrid, cell_size: f64) -> BTreeSet<[i64; 4]> {
    let occupied: BTreeSet<[i64; 4]> = grid_cells(grid, cell_size).into_iter().map(|c| c.key).collect();
    let n = ((2.0 * std::f64::consts::PI / cell_size).ceil() as usize) * 64;
    (0..n)
        .map(|k| {
            let b = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            cell_key(&Vector4::new(0.0, 0.0, b.cos(), b.sin()), cell_size)
        })
        .filter(|k| occupied.contains(k))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LocusComparison {
    pub circle_cells: usize,
    pub covered: usize,
    pub coverage: f64,
    /// Locus cells not adjacent (Chebyshev distance ≤ 1 in cell keys) to a circle cell.
    pub stray_cells: usize,
    /// Largest geodesic distance from a locus probe to the circle.
    pub max_probe_distance: f64,
}

/// Compares a detected locus with the blow-up circle `{q : q i q̄ = −i}`.
pub fn compare_with_circle(report: &BlowupReport, grid: &DomainGrid) -> LocusComparison {
    let circle = circle_cells(grid, report.cell_size);
    let locus: BTreeSet<[i64; 4]> = report.cells.iter().map(|c| c.key).collect();
    let covered = circle.iter().filter(|k| locus.contains(*k)).count();
    let near = |k: &[i64; 4]| circle.iter().any(|c| (0..4).all(|j| (c[j] - k[j]).abs() <= 1));
    let stray_cells = locus.iter().filter(|k| !near(k)).count();
    let max_probe_distance = report
        .cells
        .iter()
        .map(|c| geodesic_distance_to_blowup_circle(&Vector4::from_column_slice(&c.probe)))
        .fold(0.0, f64::max);
    LocusComparison {
        circle_cells: circle.len(),
        covered,
        coverage: if circle.is_empty() { 0.0 } else { covered as f64 / circle.len() as f64 },
        stray_cells,
        max_probe_distance,
    }
}
