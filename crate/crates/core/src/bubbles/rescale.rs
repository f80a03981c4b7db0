use std::sync::Arc;

use nalgebra::Vector4;

use crate::domains::{build_grid, DomainGrid, GridKind};
use crate::error::{input, Error, Result};
use crate::fueter::{DerivativeMode, SectionMap, SectionSample};

/// Exponential map of the source domain at `x`, applied to a vector given in frame coordinates.
pub fn exp_at(grid: &DomainGrid, x: &Vector4<f64>, frame: &[Vector4<f64>], w: &[f64]) -> Vector4<f64> {
    let big_w = ambient(frame, w);
    match grid.kind {
        GridKind::Sphere3 => {
            let r = big_w.norm();
            if r < 1e-300 {
                return *x;
            }
            x * r.cos() + big_w * (r.sin() / r)
        }
        GridKind::Torus3 => {
            let mut y = x + big_w;
            for k in 0..3 {
                y[k] = y[k].rem_euclid(grid.extent);
            }
            y
        }
        _ => x + big_w,
    }
}

/// Differential of `exp_x` at `w` applied to `t`, both in frame coordinates; ambient result.
pub fn exp_differential(grid: &DomainGrid, x: &Vector4<f64>, frame: &[Vector4<f64>], w: &[f64], t: &[f64]) -> Vector4<f64> {
    let big_t = ambient(frame, t);
    if grid.kind != GridKind::Sphere3 {
        return big_t;
    }
    let big_w = ambient(frame, w);
    let r = big_w.norm();
    if r < 1e-12 {
        return big_t;
    }
    let n = big_w / r;
    let par = big_t.dot(&n);
    (n * r.cos() - x * r.sin()) * par + (big_t - n * par) * (r.sin() / r)
}

/// Inverse of [`exp_at`] in frame coordinates.
pub fn log_at(grid: &DomainGrid, x: &Vector4<f64>, frame: &[Vector4<f64>], y: &Vector4<f64>) -> Vec<f64> {
    let big_w = match grid.kind {
        GridKind::Sphere3 => {
            let d = grid.distance(x, y);
            let u = y - x * x.dot(y);
            let n = u.norm();
            if n < 1e-300 {
                Vector4::zeros()
            } else {
                u * (d / n)
            }
        }
        _ => grid.displacement(x, y),
    };
    frame.iter().map(|v| v.dot(&big_w)).collect()
}

fn ambient(frame: &[Vector4<f64>], w: &[f64]) -> Vector4<f64> {
    frame.iter().zip(w).fold(Vector4::zeros(), |acc, (v, c)| acc + v * *c)
}

/// `y ↦ u(exp_x(offset + scale·y))` on `ℝ³`.
#[derive(Clone)]
pub struct PullbackMap {
    pub inner: Arc<dyn SectionMap>,
    pub source: Arc<DomainGrid>,
    pub x: Vector4<f64>,
    pub frame: Vec<Vector4<f64>>,
    pub offset: Vec<f64>,
    pub scale: f64,
}

impl PullbackMap {
    pub fn new(u: &SectionSample, x: &Vector4<f64>, offset: &[f64], scale: f64) -> Result<Self> {
        if u.grid.kind == GridKind::Flat4 {
            return input("rescaling is defined for three-dimensional sources");
        }
        if offset.len() != 3 {
            return input("rescaling offset needs three frame components");
        }
        Ok(Self {
            inner: u.map.clone(),
            source: u.grid.clone(),
            x: *x,
            frame: u.grid.frame_at(x),
            offset: offset.to_vec(),
            scale,
        })
    }

    fn arg(&self, y: &Vector4<f64>) -> [f64; 3] {
        [0, 1, 2].map(|a| self.offset[a] + self.scale * y[a])
    }

    /// Source point hit by `y`.
    pub fn point(&self, y: &Vector4<f64>) -> Vector4<f64> {
        exp_at(&self.source, &self.x, &self.frame, &self.arg(y))
    }
}

impl SectionMap for PullbackMap {
    fn target_dim(&self) -> usize {
        self.inner.target_dim()
    }
    fn eval(&self, y: &Vector4<f64>) -> Result<Vec<f64>> {
        self.inner.eval(&self.point(y))
    }
    fn derivative(&self, y: &Vector4<f64>, t: &Vector4<f64>) -> Option<Vec<f64>> {
        let w = self.arg(y);
        let tt = [0, 1, 2].map(|a| self.scale * t[a]);
        let dir = exp_differential(&self.source, &self.x, &self.frame, &w, &tt);
        self.inner.derivative(&self.point(y), &dir)
    }
}

/// Largest scale for which `exp_x(λ·y)`, `|y| ≤ extent`, stays inside the source domain.
pub fn max_rescale(u: &SectionSample, x: &Vector4<f64>, extent: f64) -> f64 {
    let inj = match u.grid.kind {
        GridKind::Sphere3 => 0.5 * std::f64::consts::PI,
        _ => u.grid.max_radius(x),
    };
    inj.max(0.0) / extent
}

/// Pullback of `u` by `exp_x ∘ s_λ`, resampled on a fresh `ball3` grid of spacing `h` and radius `extent`.
///
/// Values are re-evaluated from the underlying map, so there is no interpolation error.
/// Exact samples stay exact; finite-difference samples use the new grid spacing as step.
pub fn rescale_map(u: &SectionSample, x: &Vector4<f64>, lambda: f64, h: f64, extent: f64) -> Result<SectionSample> {
    if !(lambda > 0.0) {
        return input(format!("rescaling factor must be positive, got {lambda}"));
    }
    let max_lambda = max_rescale(u, x, extent);
    if lambda > max_lambda * (1.0 + 1e-12) {
        return Err(Error::ScaleTooLarge { lambda, max_lambda });
    }
    let grid = Arc::new(build_grid(GridKind::Ball3, h, extent)?);
    let map = Arc::new(PullbackMap::new(u, x, &[0.0; 3], lambda)?);
    let mode = match u.mode {
        DerivativeMode::Exact => DerivativeMode::Exact,
        DerivativeMode::FiniteDifference { .. } => DerivativeMode::FiniteDifference { step: h },
    };
    SectionSample::new(grid, u.target.clone(), map, mode)
}
