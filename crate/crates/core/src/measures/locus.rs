use std::collections::BTreeMap;

use nalgebra::Vector4;
use rayon::prelude::*;
use serde::Serialize;

use super::density::density_theta;
use super::energy::renormalized_energy;
use super::radon::RadonMeasureApprox;
use crate::domains::{DomainGrid, GridKind};
use crate::error::{input, Result};
use crate::fueter::SectionSample;

/// Ambient cube of side `H` that meets the grid, with a probe point on the domain.
#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub key: [i64; 4],
    pub probe: [f64; 4],
    pub points: usize,
}

impl Cell {
    pub fn probe(&self) -> Vector4<f64> {
        Vector4::from_column_slice(&self.probe)
    }
}

pub fn cell_key(x: &Vector4<f64>, cell_size: f64) -> [i64; 4] {
    [0, 1, 2, 3].map(|k| (x[k] / cell_size).floor() as i64)
}

/// Cells of side `cell_size` meeting the grid, in key order.
///
/// The probe is the volume-weighted centroid of the cell's grid points, projected back onto S³ for
/// sphere grids.
pub fn grid_cells(grid: &DomainGrid, cell_size: f64) -> Vec<Cell> {
    let mut acc: BTreeMap<[i64; 4], (Vector4<f64>, f64, usize)> = BTreeMap::new();
    for (p, w) in grid.points.iter().zip(&grid.weights) {
        let e = acc.entry(cell_key(p, cell_size)).or_insert((Vector4::zeros(), 0.0, 0));
        e.0 += p * *w;
        e.1 += w;
        e.2 += 1;
    }
    acc.into_iter()
        .map(|(key, (s, w, n))| {
            let mut c = s / w;
            if grid.kind == GridKind::Sphere3 {
                c = c.normalize();
            }
            Cell { key, probe: [c[0], c[1], c[2], c[3]], points: n }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LocusCell {
    pub key: [i64; 4],
    pub probe: [f64; 4],
    /// Smallest renormalized energy over the tail samples and radii.
    pub min_renormalized: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupReport {
    pub cells: Vec<LocusCell>,
    pub epsilon0_used: f64,
    pub radii_used: Vec<f64>,
    pub cell_size: f64,
    pub tail_start: usize,
    pub cells_tested: usize,
    pub cells_skipped: usize,
}

/// Cells whose renormalized energy is at least `ε₀` at every radius for every sample in the tail
/// half of `seq`.
pub fn detect_blowup_locus(seq: &[SectionSample], epsilon0: f64, radii: &[f64], cell_size: f64) -> Result<BlowupReport> {
    if seq.is_empty() {
        return input("empty sequence");
    }
    if !(epsilon0 > 0.0) {
        return input("ε₀ must be positive");
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return input("radii must be positive and nonempty");
    }
    if !(cell_size > 0.0) {
        return input("cell size must be positive");
    }
    let grid = &seq[0].grid;
    if seq.iter().any(|u| !std::sync::Arc::ptr_eq(&u.grid, grid) && u.grid.len() != grid.len()) {
        return input("all samples must share one grid");
    }
    let tail_start = seq.len() / 2;
    let tail = &seq[tail_start..];
    let cells = grid_cells(grid, cell_size);
    let rmax = radii.iter().fold(0.0_f64, |m, &r| m.max(r));
    let outcomes: Vec<Option<Option<f64>>> = cells
        .par_iter()
        .map(|c| {
            let x = c.probe();
            if grid.max_radius(&x) < rmax {
                return None;
            }
            let mut lowest = f64::INFINITY;
            for u in tail.iter().rev() {
                for &r in radii {
                    let e = renormalized_energy(u, &x, r).ok()?;
                    if e < epsilon0 {
                        return Some(None);
                    }
                    lowest = lowest.min(e);
                }
            }
            Some(Some(lowest))
        })
        .collect();
    let last = RadonMeasureApprox::from_sample(seq.last().unwrap(), "energy measure of the last sample");
    let mut theta_radii: Vec<f64> = radii.to_vec();
    theta_radii.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut out = Vec::new();
    let mut skipped = 0;
    for (c, o) in cells.iter().zip(outcomes) {
        match o {
            None => skipped += 1,
            Some(None) => {}
            Some(Some(lowest)) => {
                let x = c.probe();
                let theta = if theta_radii.len() >= 3 {
                    density_theta(&last, &x, &theta_radii)?.limit
                } else {
                    theta_radii.iter().map(|&r| last.ball_mass(&x, r) / r).sum::<f64>() / theta_radii.len() as f64
                };
                out.push(LocusCell { key: c.key, probe: c.probe, min_renormalized: lowest, theta });
            }
        }
    }
    Ok(BlowupReport {
        cells: out,
        epsilon0_used: epsilon0,
        radii_used: radii.to_vec(),
        cell_size,
        tail_start,
        cells_tested: cells.len() - skipped,
        cells_skipped: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::build_grid;
    use crate::fueter::{AffineMap, FnMap};
    use crate::hk::flat_quaternion_target;
    use std::sync::Arc;

    #[test]
    fn constant_and_smooth_sequences_have_empty_locus() {
        let g = Arc::new(build_grid(GridKind::Torus3, 0.05, 1.0).unwrap());
        let t = Arc::new(flat_quaternion_target(1, false));
        let c = SectionSample::exact(g.clone(), t.clone(), Arc::new(AffineMap::constant(vec![0.0; 4]))).unwrap();
        let rep = detect_blowup_locus(&vec![c; 4], 0.1, &[0.1, 0.2], 0.125).unwrap();
        assert!(rep.cells.is_empty());
        let m = FnMap::new(4, |x: &Vector4<f64>| {
            let a = 2.0 * std::f64::consts::PI;
            vec![(a * x[0]).sin(), (a * x[1]).cos(), 0.0, 0.0]
        });
        let s = SectionSample::finite_difference(g, t, Arc::new(m)).unwrap();
        let rep = detect_blowup_locus(&vec![s; 4], 20.0, &[0.1, 0.2], 0.125).unwrap();
        assert!(rep.cells.is_empty());
        assert!(detect_blowup_locus(&[], 1.0, &[0.1], 0.1).is_err());
    }
}
