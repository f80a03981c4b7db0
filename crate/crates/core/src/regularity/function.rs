use std::sync::Arc;

use nalgebra::Vector4;

use crate::domains::{DomainGrid, GridKind};
use crate::error::Result;
use crate::fueter::SectionSample;
use crate::measures::smoothed_indicator;

type Callable = Arc<dyn Fn(&Vector4<f64>) -> Result<f64> + Send + Sync>;

/// A nonnegative function sampled on a grid, with a callable used off the grid for
/// finite-difference Laplacians.
#[derive(Clone)]
pub struct GridFunction {
    pub grid: Arc<DomainGrid>,
    pub values: Vec<f64>,
    f: Callable,
}

impl std::fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFunction").field("kind", &self.grid.kind).field("points", &self.values.len()).finish()
    }
}

impl GridFunction {
    pub fn new(grid: Arc<DomainGrid>, f: impl Fn(&Vector4<f64>) -> f64 + Send + Sync + 'static) -> Self {
        Self::fallible(grid, Arc::new(move |x: &Vector4<f64>| Ok(f(x)))).expect("infallible")
    }

    fn fallible(grid: Arc<DomainGrid>, f: Callable) -> Result<Self> {
        let values = grid.points.iter().map(|x| f(x)).collect::<Result<_>>()?;
        Ok(Self { grid, values, f })
    }

    /// `|∇u|²` of a sample; off-grid values use the sample's derivative mode.
    pub fn energy_density(u: &SectionSample) -> Self {
        let v = u.clone();
        Self { grid: u.grid.clone(), values: u.energy_density.clone(), f: Arc::new(move |x: &Vector4<f64>| v.density_at(x)) }
    }

    pub fn eval(&self, x: &Vector4<f64>) -> Result<f64> {
        (self.f)(x)
    }

    /// `Σ_a v_a v_a f` by centred differences with step `h` along the frame flows
    /// (the analyst's Laplacian; on S³ the frame fields are divergence free).
    pub fn laplacian(&self, x: &Vector4<f64>, h: f64) -> Result<f64> {
        let f0 = self.eval(x)?;
        let mut s = 0.0;
        for a in 0..self.grid.frame_len() {
            let p = self.eval(&self.grid.flow(x, a, h))?;
            let m = self.eval(&self.grid.flow(x, a, -h))?;
            s += p + m - 2.0 * f0;
        }
        Ok(s / (h * h))
    }

    /// Grid indices in the sharp ball `B_r(x)`, sorted.
    pub fn ball(&self, x: &Vector4<f64>, r: f64) -> Vec<usize> {
        let mut idx = self.grid.ball_indices(x, r);
        idx.sort_unstable();
        idx
    }

    /// `∫_{B_r(x)} f` with the ramp-smoothed ball indicator.
    pub fn ball_integral(&self, x: &Vector4<f64>, r: f64) -> f64 {
        let w = self.grid.h.min(0.5 * r);
        self.ball(x, r + 0.5 * w)
            .into_iter()
            .map(|i| self.values[i] * self.grid.weights[i] * smoothed_indicator(self.grid.distance(x, &self.grid.points[i]), r, w))
            .sum()
    }

    /// Dimension `n` of the domain.
    pub fn dimension(&self) -> f64 {
        if self.grid.kind == GridKind::Flat4 {
            4.0
        } else {
            3.0
        }
    }
}
