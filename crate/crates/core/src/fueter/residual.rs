use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::section::SectionSample;
use crate::domains::{psi_apply, GridKind};
use crate::error::{input, Result};

/// Per-point `ℱu = Σ_a I_a ∂_{v_a} u` and its target-metric norm.
#[derive(Clone, Debug)]
pub struct FueterResidualField {
    pub dim: usize,
    pub vectors: Vec<f64>,
    pub norms: Vec<f64>,
}

impl FueterResidualField {
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().fold(0.0, |m, &x| m.max(x))
    }
}

pub fn fueter_residual_3d(u: &SectionSample) -> Result<FueterResidualField> {
    if u.grid.kind == GridKind::Flat4 {
        return input("the 3D Fueter operator needs a ball3, torus3 or sphere3 grid");
    }
    if u.grid.len() < 2 {
        return input("grid too small for the difference stencil");
    }
    let rows: Vec<Result<(Vec<f64>, f64)>> = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let h = u.target.structure_at(u.value(i))?;
            let mut f = DVector::zeros(u.dim);
            for a in 0..3 {
                f += &h.complex[a] * DVector::from_column_slice(u.frame_derivative(i, a));
            }
            let n = h.norm_sqr(&f).max(0.0).sqrt();
            Ok((f.as_slice().to_vec(), n))
        })
        .collect();
    let mut vectors = Vec::with_capacity(u.len() * u.dim);
    let mut norms = Vec::with_capacity(u.len());
    for r in rows {
        let (v, n) = r?;
        vectors.extend(v);
        norms.push(n);
    }
    Ok(FueterResidualField { dim: u.dim, vectors, norms })
}

/// `(id − Ψ)T` for a linear map `T: ℝ⁴ → ℍⁿ` given as a `4n × 4` matrix.
pub fn fueter_residual_4d(t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if t.ncols() != 4 || t.nrows() % 4 != 0 || t.nrows() == 0 {
        return input(format!("expected a 4n x 4 matrix, got {}x{}", t.nrows(), t.ncols()));
    }
    Ok(t - psi_apply(t))
}

/// Pointwise Frobenius norm of `(id − Ψ)∇u` on a flat4 sample into a flat target.
pub fn fueter_residual_4d_field(u: &SectionSample) -> Result<Vec<f64>> {
    if u.grid.kind != GridKind::Flat4 {
        return input("the 4D Fueter operator needs a flat4 grid");
    }
    (0..u.len()).map(|i| Ok(fueter_residual_4d(&u.derivative_matrix(i))?.norm())).collect()
}
