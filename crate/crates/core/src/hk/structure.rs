use nalgebra::{DMatrix, DVector, Vector3};
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::quaternion::Quaternion;

/// Metric, complex structures and Kähler forms of a hyperkähler target at a point,
/// all written in chart coordinates.
#[derive(Clone, Debug)]
pub struct HkStructure {
    pub metric: DMatrix<f64>,
    pub complex: [DMatrix<f64>; 3],
    /// `ω_a(v, w) = G(I_a v, w)`, stored as the matrix `I_aᵀ G`.
    pub kahler: [DMatrix<f64>; 3],
}

/// Worst violations of the hyperkähler relations, as Frobenius norms.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct HkResiduals {
    pub square: f64,
    pub quaternion: f64,
    pub isometry: f64,
    pub kahler_antisymmetry: f64,
    pub metric_symmetry: f64,
}

impl HkResiduals {
    pub fn max(&self) -> f64 {
        [
            self.square,
            self.quaternion,
            self.isometry,
            self.kahler_antisymmetry,
            self.metric_symmetry,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl HkStructure {
    pub fn new(metric: DMatrix<f64>, complex: [DMatrix<f64>; 3]) -> Result<Self> {
        let dim = metric.nrows();
        if dim < 4 || dim % 2 != 0 || metric.ncols() != dim {
            return input(format!("metric must be square of even size ≥ 4, got {}x{}", dim, metric.ncols()));
        }
        if complex.iter().any(|c| c.shape() != (dim, dim)) {
            return input("complex structures must match the metric dimension");
        }
        let kahler = [0, 1, 2].map(|a| complex[a].transpose() * &metric);
        Ok(Self { metric, complex, kahler })
    }

    /// Identity metric and left multiplication by `i, j, k` on each factor of `ℍⁿ`.
    pub fn flat(n: usize) -> Self {
        let dim = 4 * n;
        let metric = DMatrix::identity(dim, dim);
        let complex = [0, 1, 2].map(|a| {
            let block = Quaternion::UNITS[a].left_matrix();
            let mut m = DMatrix::zeros(dim, dim);
            for f in 0..n {
                m.view_mut((4 * f, 4 * f), (4, 4)).copy_from(&block);
            }
            m
        });
        Self::new(metric, complex).expect("flat structure is well formed")
    }

    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn inner(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v.transpose() * &self.metric * w)[(0, 0)]
    }

    pub fn norm_sqr(&self, v: &DVector<f64>) -> f64 {
        self.inner(v, v)
    }

    pub fn omega(&self, a: usize, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v.transpose() * &self.kahler[a] * w)[(0, 0)]
    }

    /// `I_ξ = Σ ξ_a I_a` for a unit vector `ξ`.
    pub fn complex_structure(&self, xi: &Vector3<f64>) -> Result<DMatrix<f64>> {
        check_unit(xi)?;
        Ok(&self.complex[0] * xi[0] + &self.complex[1] * xi[1] + &self.complex[2] * xi[2])
    }

    /// `ω_ξ = G(I_ξ ·, ·)` as a matrix.
    pub fn kahler_form(&self, xi: &Vector3<f64>) -> Result<DMatrix<f64>> {
        Ok(self.complex_structure(xi)?.transpose() * &self.metric)
    }

    pub fn residuals(&self) -> HkResiduals {
        let dim = self.dim();
        let id = DMatrix::<f64>::identity(dim, dim);
        let [i1, i2, i3] = &self.complex;
        let square = self
            .complex
            .iter()
            .map(|c| (c * c + &id).norm())
            .fold(0.0, f64::max);
        let quaternion = [(i1 * i2 - i3).norm(), (i2 * i3 - i1).norm(), (i3 * i1 - i2).norm()]
            .into_iter()
            .fold(0.0, f64::max);
        let scale = self.metric.norm().max(1.0);
        let isometry = self
            .complex
            .iter()
            .map(|c| (c.transpose() * &self.metric * c - &self.metric).norm() / scale)
            .fold(0.0, f64::max);
        let kahler_antisymmetry = self
            .kahler
            .iter()
            .map(|w| (w + w.transpose()).norm() / scale)
            .fold(0.0, f64::max);
        let metric_symmetry = (&self.metric - self.metric.transpose()).norm() / scale;
        HkResiduals { square, quaternion, isometry, kahler_antisymmetry, metric_symmetry }
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let r = self.residuals();
        if r.max() > tol {
            return Err(Error::Input(format!("hyperkähler relations violated: {r:?}")));
        }
        if self.metric.clone().cholesky().is_none() {
            return input("metric is not positive definite");
        }
        Ok(())
    }
}

pub(crate) fn check_unit(xi: &Vector3<f64>) -> Result<()> {
    if (xi.norm() - 1.0).abs() > 1e-10 {
        return input(format!("ξ must be a unit vector, |ξ| = {}", xi.norm()));
    }
    Ok(())
}

pub fn complex_structure_from_xi(h: &HkStructure, xi: &Vector3<f64>) -> Result<DMatrix<f64>> {
    h.complex_structure(xi)
}
