use std::io::Write;
use std::sync::Arc;

use nalgebra::Vector4;

use crate::domains::{DomainGrid, GridKind};
use crate::fueter::SectionSample;

/// Distance used for ball queries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric {
    Euclidean,
    /// Great-circle distance on the unit sphere.
    Sphere,
    /// Flat torus with the given period on the first three coordinates.
    Torus(f64),
}

impl Metric {
    pub fn for_grid(grid: &DomainGrid) -> Self {
        match grid.kind {
            GridKind::Sphere3 => Metric::Sphere,
            GridKind::Torus3 => Metric::Torus(grid.extent),
            _ => Metric::Euclidean,
        }
    }

    pub fn distance(&self, x: &Vector4<f64>, y: &Vector4<f64>) -> f64 {
        match *self {
            Metric::Euclidean => (x - y).norm(),
            Metric::Sphere => 2.0 * (0.5 * (x - y).norm()).min(1.0).asin(),
            Metric::Torus(l) => {
                let mut d = y - x;
                for k in 0..3 {
                    d[k] -= l * (d[k] / l).round();
                }
                d.norm()
            }
        }
    }
}

/// Indicator of `d < r` with a linear ramp of width `w` centred on `r`.
pub fn smoothed_indicator(d: f64, r: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return if d < r { 1.0 } else { 0.0 };
    }
    ((r - d) / w + 0.5).clamp(0.0, 1.0)
}

/// Weighted point masses.
#[derive(Clone)]
pub struct RadonMeasureApprox {
    pub atoms: Vec<(Vector4<f64>, f64)>,
    pub tag: String,
    pub metric: Metric,
    /// Ramp width of the ball indicator, capped at the radius; zero for sharp balls.
    pub smoothing: f64,
    /// Grid whose points coincide with the atoms, used to accelerate ball queries.
    grid: Option<Arc<DomainGrid>>,
}

impl std::fmt::Debug for RadonMeasureApprox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadonMeasureApprox")
            .field("atoms", &self.atoms.len())
            .field("tag", &self.tag)
            .field("metric", &self.metric)
            .field("smoothing", &self.smoothing)
            .finish()
    }
}

impl RadonMeasureApprox {
    pub fn new(atoms: Vec<(Vector4<f64>, f64)>, tag: impl Into<String>, metric: Metric) -> Self {
        Self { atoms, tag: tag.into(), metric, smoothing: 0.0, grid: None }
    }

    /// `|∇u|² dvol` as atoms at the grid points.
    pub fn from_sample(u: &SectionSample, tag: impl Into<String>) -> Self {
        let atoms = u
            .grid
            .points
            .iter()
            .zip(&u.grid.weights)
            .zip(&u.energy_density)
            .map(|((p, w), e)| (*p, e * w))
            .collect();
        Self::on_grid(u.grid.clone(), atoms, tag)
    }

    /// Atoms aligned with the points of `grid`.
    pub fn on_grid(grid: Arc<DomainGrid>, atoms: Vec<(Vector4<f64>, f64)>, tag: impl Into<String>) -> Self {
        debug_assert_eq!(atoms.len(), grid.len());
        Self { metric: Metric::for_grid(&grid), smoothing: grid.h, atoms, tag: tag.into(), grid: Some(grid) }
    }

    pub fn with_smoothing(mut self, w: f64) -> Self {
        self.smoothing = w;
        self
    }

    pub fn grid(&self) -> Option<&Arc<DomainGrid>> {
        self.grid.as_ref()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, m)| m).sum()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.atoms[i].1
    }

    /// `μ(B_r(x))` with the measure's ball smoothing; nondecreasing in `r`.
    pub fn ball_mass(&self, x: &Vector4<f64>, r: f64) -> f64 {
        let w = self.smoothing.min(r);
        let reach = r + 0.5 * w;
        match &self.grid {
            Some(g) => {
                let mut idx = g.ball_indices(x, reach);
                idx.sort_unstable();
                idx.into_iter()
                    .map(|i| {
                        let (p, m) = &self.atoms[i];
                        m * smoothed_indicator(self.metric.distance(x, p), r, w)
                    })
                    .sum()
            }
            None => self
                .atoms
                .iter()
                .map(|(p, m)| m * smoothed_indicator(self.metric.distance(x, p), r, w))
                .sum(),
        }
    }

    /// Sum of two measures on the same support convention.
    pub fn sum(&self, other: &RadonMeasureApprox) -> RadonMeasureApprox {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().copied());
        RadonMeasureApprox {
            atoms,
            tag: format!("{} + {}", self.tag, other.tag),
            metric: self.metric,
            smoothing: self.smoothing,
            grid: None,
        }
    }

    /// CSV with columns `x,y,z,w,mass`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,z,w,mass")?;
        for (p, m) in &self.atoms {
            writeln!(out, "{},{},{},{},{}", p[0], p[1], p[2], p[3], m)?;
        }
        Ok(())
    }
}
