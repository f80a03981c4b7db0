use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3, Vector4};
use rayon::prelude::*;

use crate::domains::{hopf_differential, DomainGrid};
use crate::error::{input, Result};
use crate::hk::{sphere_scaling_point, SphereMap, TargetChart};
use crate::quaternion::Quaternion;

/// A map from the ambient coordinates of a domain into chart coordinates.
pub trait SectionMap: Send + Sync {
    fn target_dim(&self) -> usize;

    fn eval(&self, x: &Vector4<f64>) -> Result<Vec<f64>>;

    /// Closed-form derivative along the ambient tangent vector `t`, when available.
    fn derivative(&self, _x: &Vector4<f64>, _t: &Vector4<f64>) -> Option<Vec<f64>> {
        None
    }
}

/// `u(x) = c + M x` on the first `M.ncols()` coordinates.
#[derive(Clone, Debug)]
pub struct AffineMap {
    pub offset: DVector<f64>,
    pub matrix: DMatrix<f64>,
}

impl AffineMap {
    pub fn new(offset: DVector<f64>, matrix: DMatrix<f64>) -> Self {
        Self { offset, matrix }
    }

    pub fn constant(value: Vec<f64>) -> Self {
        let n = value.len();
        Self { offset: DVector::from_vec(value), matrix: DMatrix::zeros(n, 3) }
    }

    /// `x₁·i − x₂·j` into `ℍ`.
    pub fn linear_fueter() -> Self {
        let mut m = DMatrix::zeros(4, 3);
        m[(1, 0)] = 1.0;
        m[(2, 1)] = -1.0;
        Self { offset: DVector::zeros(4), matrix: m }
    }

    /// `x₁·i + x₂·j + x₃·k` into `ℍ`.
    pub fn linear_identity() -> Self {
        let mut m = DMatrix::zeros(4, 3);
        m[(1, 0)] = 1.0;
        m[(2, 1)] = 1.0;
        m[(3, 2)] = 1.0;
        Self { offset: DVector::zeros(4), matrix: m }
    }
}

impl SectionMap for AffineMap {
    fn target_dim(&self) -> usize {
        self.offset.len()
    }
    fn eval(&self, x: &Vector4<f64>) -> Result<Vec<f64>> {
        let k = self.matrix.ncols();
        let xs = DVector::from_iterator(k, x.iter().take(k).copied());
        Ok((&self.offset + &self.matrix * xs).as_slice().to_vec())
    }
    fn derivative(&self, _x: &Vector4<f64>, t: &Vector4<f64>) -> Option<Vec<f64>> {
        let k = self.matrix.ncols();
        let ts = DVector::from_iterator(k, t.iter().take(k).copied());
        Some((&self.matrix * ts).as_slice().to_vec())
    }
}

type EvalFn = dyn Fn(&Vector4<f64>) -> Vec<f64> + Send + Sync;
type DerivFn = dyn Fn(&Vector4<f64>, &Vector4<f64>) -> Vec<f64> + Send + Sync;

/// A map given by closures.
#[derive(Clone)]
pub struct FnMap {
    pub dim: usize,
    pub f: Arc<EvalFn>,
    pub df: Option<Arc<DerivFn>>,
}

impl FnMap {
    pub fn new(dim: usize, f: impl Fn(&Vector4<f64>) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { dim, f: Arc::new(f), df: None }
    }

    pub fn with_derivative(mut self, df: impl Fn(&Vector4<f64>, &Vector4<f64>) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.df = Some(Arc::new(df));
        self
    }
}

impl SectionMap for FnMap {
    fn target_dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &Vector4<f64>) -> Result<Vec<f64>> {
        Ok((self.f)(x))
    }
    fn derivative(&self, x: &Vector4<f64>, t: &Vector4<f64>) -> Option<Vec<f64>> {
        self.df.as_ref().map(|df| df(x, t))
    }
}

/// `u_λ = z ∘ s_λ ∘ π` on S³.
#[derive(Clone)]
pub struct HnsMap {
    pub z: Arc<dyn SphereMap>,
    pub lambda: f64,
}

impl HnsMap {
    fn base(&self, x: &Vector4<f64>) -> Vector3<f64> {
        let q = Quaternion::from_vector(x).normalize();
        (q * Quaternion::I * q.conj()).imag()
    }
}

impl SectionMap for HnsMap {
    fn target_dim(&self) -> usize {
        self.z.target_dim()
    }
    fn eval(&self, x: &Vector4<f64>) -> Result<Vec<f64>> {
        let p = self.base(x);
        let (s, _) = sphere_scaling_point(self.lambda, &p, &Vector3::zeros());
        Ok(self.z.eval(&s))
    }
    fn derivative(&self, x: &Vector4<f64>, t: &Vector4<f64>) -> Option<Vec<f64>> {
        let q = Quaternion::from_vector(x).normalize();
        let p = (q * Quaternion::I * q.conj()).imag();
        let dp = hopf_differential(q, Quaternion::from_vector(t)).imag();
        let (s, ds) = sphere_scaling_point(self.lambda, &p, &dp);
        Some(self.z.push_forward(&s, &ds))
    }
}

/// `x ↦ z(x/|x|)` on `ℝ³ ∖ {0}`.
#[derive(Clone)]
pub struct RadialExtension {
    pub z: Arc<dyn SphereMap>,
}

impl SectionMap for RadialExtension {
    fn target_dim(&self) -> usize {
        self.z.target_dim()
    }
    fn eval(&self, x: &Vector4<f64>) -> Result<Vec<f64>> {
        let p = x.xyz();
        let r = p.norm();
        if r == 0.0 {
            return input("radial extension is undefined at the origin");
        }
        Ok(self.z.eval(&(p / r)))
    }
    fn derivative(&self, x: &Vector4<f64>, t: &Vector4<f64>) -> Option<Vec<f64>> {
        let p = x.xyz();
        let r = p.norm();
        let n = p / r;
        let tt = t.xyz();
        let tan = (tt - n * n.dot(&tt)) / r;
        Some(self.z.push_forward(&n, &tan))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeMode {
    /// Closed-form push-forward supplied by the map.
    Exact,
    /// Centered differences along the frame flows with the given step.
    FiniteDifference { step: f64 },
}

/// A map sampled on a grid: values, frame derivatives and energy density.
///
/// Derivatives are stored flat: entry `(i, a, c)` at `(i·m + a)·dim + c` with `m` frame directions.
#[derive(Clone)]
pub struct SectionSample {
    pub grid: Arc<DomainGrid>,
    pub target: Arc<dyn TargetChart>,
    pub map: Arc<dyn SectionMap>,
    pub mode: DerivativeMode,
    pub dim: usize,
    pub frame_len: usize,
    pub values: Vec<f64>,
    pub derivative: Vec<f64>,
    pub energy_density: Vec<f64>,
}

impl std::fmt::Debug for SectionSample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SectionSample")
            .field("kind", &self.grid.kind)
            .field("points", &self.grid.len())
            .field("target", &self.target.name())
            .field("mode", &self.mode)
            .finish()
    }
}

/// Frame derivatives of `map` at `x`, one target vector per frame direction.
pub fn frame_derivatives(
    grid: &DomainGrid,
    target: &dyn TargetChart,
    map: &dyn SectionMap,
    mode: DerivativeMode,
    x: &Vector4<f64>,
) -> Result<Vec<Vec<f64>>> {
    let frame = grid.frame_at(x);
    match mode {
        DerivativeMode::Exact => frame
            .iter()
            .map(|v| map.derivative(x, v).ok_or_else(|| crate::Error::Input("map has no closed-form derivative".into())))
            .collect(),
        DerivativeMode::FiniteDifference { step } => (0..frame.len())
            .map(|a| {
                let fwd = map.eval(&grid.flow(x, a, step))?;
                let bwd = map.eval(&grid.flow(x, a, -step))?;
                Ok(target.displacement(&bwd, &fwd).into_iter().map(|d| d / (2.0 * step)).collect())
            })
            .collect(),
    }
}

/// `Σ_a G(∂_a u, ∂_a u)`.
pub fn density_from(metric: &DMatrix<f64>, du: &[Vec<f64>]) -> f64 {
    du.iter()
        .map(|d| {
            let v = DVector::from_column_slice(d);
            (v.transpose() * metric * &v)[(0, 0)]
        })
        .sum()
}

impl SectionSample {
    pub fn new(
        grid: Arc<DomainGrid>,
        target: Arc<dyn TargetChart>,
        map: Arc<dyn SectionMap>,
        mode: DerivativeMode,
    ) -> Result<Self> {
        let dim = target.dim();
        if map.target_dim() != dim {
            return input(format!("map has {} components but target {} has dimension {dim}", map.target_dim(), target.name()));
        }
        if let DerivativeMode::FiniteDifference { step } = mode {
            if !(step > 0.0) {
                return input("finite-difference step must be positive");
            }
        }
        let m = grid.frame_len();
        let rows: Vec<Result<(Vec<f64>, Vec<f64>, f64)>> = grid
            .points
            .par_iter()
            .map(|x| {
                let val = map.eval(x)?;
                let du = frame_derivatives(&grid, target.as_ref(), map.as_ref(), mode, x)?;
                let g = target.metric_at(&val)?;
                let e = density_from(&g, &du);
                Ok((val, du.concat(), e))
            })
            .collect();
        let mut values = Vec::with_capacity(grid.len() * dim);
        let mut derivative = Vec::with_capacity(grid.len() * dim * m);
        let mut energy_density = Vec::with_capacity(grid.len());
        for r in rows {
            let (v, d, e) = r?;
            values.extend(v);
            derivative.extend(d);
            energy_density.push(e);
        }
        Ok(Self { grid, target, map, mode, dim, frame_len: m, values, derivative, energy_density })
    }

    /// Finite differences with step equal to the grid spacing.
    pub fn finite_difference(grid: Arc<DomainGrid>, target: Arc<dyn TargetChart>, map: Arc<dyn SectionMap>) -> Result<Self> {
        let step = grid.h;
        Self::new(grid, target, map, DerivativeMode::FiniteDifference { step })
    }

    pub fn exact(grid: Arc<DomainGrid>, target: Arc<dyn TargetChart>, map: Arc<dyn SectionMap>) -> Result<Self> {
        Self::new(grid, target, map, DerivativeMode::Exact)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn frame_derivative(&self, i: usize, a: usize) -> &[f64] {
        let s = (i * self.frame_len + a) * self.dim;
        &self.derivative[s..s + self.dim]
    }

    /// Derivative at point `i` as a `dim × m` matrix.
    pub fn derivative_matrix(&self, i: usize) -> DMatrix<f64> {
        let s = i * self.frame_len * self.dim;
        DMatrix::from_column_slice(self.dim, self.frame_len, &self.derivative[s..s + self.frame_len * self.dim])
    }

    /// Derivatives and density at an arbitrary domain point, with the sample's mode.
    pub fn derivatives_at(&self, x: &Vector4<f64>) -> Result<Vec<Vec<f64>>> {
        frame_derivatives(&self.grid, self.target.as_ref(), self.map.as_ref(), self.mode, x)
    }

    pub fn density_at(&self, x: &Vector4<f64>) -> Result<f64> {
        let val = self.map.eval(x)?;
        let du = self.derivatives_at(x)?;
        Ok(density_from(&self.target.metric_at(&val)?, &du))
    }

    /// Largest deviation between stored density and the metric norm of the stored derivative.
    pub fn consistency_error(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            let g = self.target.metric_at(self.value(i))?;
            let du: Vec<Vec<f64>> = (0..self.frame_len).map(|a| self.frame_derivative(i, a).to_vec()).collect();
            let e = density_from(&g, &du);
            worst = worst.max((e - self.energy_density[i]).abs() / (1.0 + e.abs()));
        }
        Ok(worst)
    }

    /// CSV dump: `id,x0,x1,x2,x3,density` followed by any extra named columns.
    pub fn write_csv<W: Write>(&self, mut out: W, extra: &[(&str, &[f64])]) -> std::io::Result<()> {
        write!(out, "id,x0,x1,x2,x3,density")?;
        for (name, _) in extra {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for (i, p) in self.grid.points.iter().enumerate() {
            write!(out, "{i},{},{},{},{},{}", p[0], p[1], p[2], p[3], self.energy_density[i])?;
            for (_, col) in extra {
                write!(out, ",{}", col[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
