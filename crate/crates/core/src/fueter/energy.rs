use nalgebra::{DMatrix, DVector, Vector4};
use rayon::prelude::*;
use serde::Serialize;

use super::residual::fueter_residual_3d;
use super::section::{frame_derivatives, DerivativeMode, SectionSample};
use crate::domains::GridKind;
use crate::error::{input, Result};

/// Sign with which `2[ω₁(∂₂u,∂₃u) − ω₂(∂₁u,∂₃u) + ω₃(∂₁u,∂₂u)]` enters the energy identity
/// for left multiplication by `i, j, k` and the frame orientation `(v₁, v₂, v₃)`.
pub const PAIRING_SIGN: f64 = -1.0;

/// `∫ |∇u|²` with a fixed summation order.
pub fn total_energy(u: &SectionSample) -> f64 {
    u.energy_density.iter().zip(&u.grid.weights).map(|(e, w)| e * w).sum()
}

#[derive(Clone, Debug)]
pub struct EnergyIdentity {
    pub du2: Vec<f64>,
    pub fu2: Vec<f64>,
    pub pairing: Vec<f64>,
    pub residual: Vec<f64>,
}

impl EnergyIdentity {
    pub fn max_abs_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Index pairs `(b, c)` paired with `ω₁, ω₂, ω₃` and their signs.
const PAIRS: [(usize, usize, f64); 3] = [(1, 2, 1.0), (0, 2, -1.0), (0, 1, 1.0)];

fn pairing_pointwise(kahler: &[DMatrix<f64>; 3], du: &[DVector<f64>]) -> f64 {
    let mut s = 0.0;
    for (a, &(b, c, sign)) in PAIRS.iter().enumerate() {
        s += sign * (du[b].transpose() * &kahler[a] * &du[c])[(0, 0)];
    }
    PAIRING_SIGN * 2.0 * s
}

/// `|du|² − |ℱu|² − pairing` per point.
///
/// With closed-form derivatives the pairing is evaluated pointwise. With finite differences it is
/// the discrete exterior derivative of the pulled-back potential `½ ω(y − u(x), ·)`, so the
/// identity holds to the order of the difference scheme.
pub fn energy_identity_residual(u: &SectionSample) -> Result<EnergyIdentity> {
    if u.grid.kind == GridKind::Flat4 {
        return input("the energy identity needs a 3D grid");
    }
    let fu = fueter_residual_3d(u)?;
    let rows: Vec<Result<(f64, f64, f64)>> = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let h = u.target.structure_at(u.value(i))?;
            let fv = DVector::from_column_slice(fu.vector(i));
            let fu2 = h.norm_sqr(&fv);
            let du2 = u.energy_density[i];
            let pairing = match u.mode {
                DerivativeMode::Exact => {
                    let du: Vec<DVector<f64>> = (0..3).map(|a| DVector::from_column_slice(u.frame_derivative(i, a))).collect();
                    pairing_pointwise(&h.kahler, &du)
                }
                DerivativeMode::FiniteDifference { step } => potential_pairing(u, i, &h.kahler, step)?,
            };
            Ok((du2, fu2, pairing))
        })
        .collect();
    let mut out = EnergyIdentity { du2: vec![], fu2: vec![], pairing: vec![], residual: vec![] };
    for r in rows {
        let (a, b, c) = r?;
        out.du2.push(a);
        out.fu2.push(b);
        out.pairing.push(c);
        out.residual.push(a - b - c);
    }
    Ok(out)
}

/// Pointwise pairing `2Σ ±ω_a(∂_b u, ∂_c u)` of the stored derivatives (any mode).
pub fn pairing_density(u: &SectionSample) -> Result<Vec<f64>> {
    (0..u.len())
        .map(|i| {
            let h = u.target.structure_at(u.value(i))?;
            let du: Vec<DVector<f64>> = (0..3).map(|a| DVector::from_column_slice(u.frame_derivative(i, a))).collect();
            Ok(pairing_pointwise(&h.kahler, &du))
        })
        .collect()
}

fn potential_pairing(u: &SectionSample, i: usize, kahler: &[DMatrix<f64>; 3], step: f64) -> Result<f64> {
    let x: Vector4<f64> = u.grid.points[i];
    let base = u.value(i).to_vec();
    // lam[b][±][a][c] = Λ_{a,c} at flow_b(x, ±step)
    let mut lam = [[[[0.0; 3]; 3]; 2]; 3];
    for b in 0..3 {
        for (k, t) in [step, -step].into_iter().enumerate() {
            let y = u.grid.flow(&x, b, t);
            let val = u.map.eval(&y)?;
            let disp = DVector::from_vec(u.target.displacement(&base, &val));
            let dy = frame_derivatives(&u.grid, u.target.as_ref(), u.map.as_ref(), u.mode, &y)?;
            for a in 0..3 {
                let w = disp.transpose() * &kahler[a];
                for c in 0..3 {
                    lam[b][k][a][c] = 0.5 * (&w * DVector::from_column_slice(&dy[c]))[(0, 0)];
                }
            }
        }
    }
    let d = |b: usize, a: usize, c: usize| (lam[b][0][a][c] - lam[b][1][a][c]) / (2.0 * step);
    let mut s = 0.0;
    for (a, &(b, c, sign)) in PAIRS.iter().enumerate() {
        s += sign * (d(b, a, c) - d(c, a, b));
    }
    Ok(PAIRING_SIGN * 2.0 * s)
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffInequality {
    /// `Δ|∇u|² / (|∇u|^p + 1)`, `None` where the stencil leaves the domain.
    pub ratio: Vec<Option<f64>>,
    pub laplacian: Vec<Option<f64>>,
    pub max: f64,
    pub excluded: usize,
}

/// Ratio of the positive Laplacian of the energy density to `|∇u|^p + 1`.
pub fn diff_inequality_ratio(u: &SectionSample, exponent: u32) -> Result<DiffInequality> {
    if exponent != 3 && exponent != 4 {
        return input(format!("exponent must be 3 or 4, got {exponent}"));
    }
    let s = u.grid.h;
    let m = u.frame_len;
    let rows: Vec<Option<(f64, f64)>> = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let x = u.grid.points[i];
            if u.grid.kind == GridKind::Ball3 && x.norm() + s > u.grid.extent {
                return None;
            }
            let e0 = u.energy_density[i];
            let mut lap = 0.0;
            for a in 0..m {
                let ep = u.density_at(&u.grid.flow(&x, a, s)).ok()?;
                let em = u.density_at(&u.grid.flow(&x, a, -s)).ok()?;
                lap -= (ep - 2.0 * e0 + em) / (s * s);
            }
            let denom = e0.sqrt().powi(exponent as i32) + 1.0;
            Some((lap, lap / denom))
        })
        .collect();
    let mut out = DiffInequality { ratio: vec![], laplacian: vec![], max: 0.0, excluded: 0 };
    for r in rows {
        match r {
            Some((l, q)) => {
                out.laplacian.push(Some(l));
                out.ratio.push(Some(q));
                out.max = out.max.max(q);
            }
            None => {
                out.laplacian.push(None);
                out.ratio.push(None);
                out.excluded += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::build_grid;
    use crate::fueter::section::AffineMap;
    use crate::hk::flat_quaternion_target;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn ball_sample(map: AffineMap, h: f64) -> SectionSample {
        let g = Arc::new(build_grid(GridKind::Ball3, h, 1.0).unwrap());
        SectionSample::exact(g, Arc::new(flat_quaternion_target(1, false)), Arc::new(map)).unwrap()
    }

    #[test]
    fn energy_of_linear_fueter_map() {
        let u = ball_sample(AffineMap::linear_fueter(), 1.0 / 16.0);
        let e = total_energy(&u);
        let exact = 2.0 * 4.0 * PI / 3.0;
        assert!((e - exact).abs() < 0.02 * exact);
        assert!(u.consistency_error().unwrap() < 1e-12);
    }

    #[test]
    fn energy_is_quadratic_in_values() {
        let mut m = AffineMap::linear_identity();
        let e1 = total_energy(&ball_sample(m.clone(), 0.125));
        m.matrix /= 2f64.sqrt();
        let e2 = total_energy(&ball_sample(m, 0.125));
        assert!((e2 - 0.5 * e1).abs() < 1e-12 * e1);
        assert_eq!(total_energy(&ball_sample(AffineMap::constant(vec![0.0; 4]), 0.25)), 0.0);
    }

    /// Calibration of the pairing sign: both oracle maps must close the identity.
    #[test]
    fn pairing_sign_regression() {
        let a = energy_identity_residual(&ball_sample(AffineMap::linear_fueter(), 0.25)).unwrap();
        assert!((a.du2[0] - 2.0).abs() < 1e-12);
        assert!(a.fu2[0].abs() < 1e-12);
        assert!((a.pairing[0] - 2.0).abs() < 1e-12);
        assert!(a.max_abs_residual() < 1e-12);
        let b = energy_identity_residual(&ball_sample(AffineMap::linear_identity(), 0.25)).unwrap();
        assert!((b.du2[0] - 3.0).abs() < 1e-12);
        assert!((b.fu2[0] - 9.0).abs() < 1e-12);
        assert!((b.pairing[0] + 6.0).abs() < 1e-12);
        assert!(b.max_abs_residual() < 1e-12);
        assert_eq!(PAIRING_SIGN, -1.0);
    }

    #[test]
    fn diff_inequality_vanishes_for_linear_maps() {
        let u = ball_sample(AffineMap::linear_fueter(), 0.125);
        let d = diff_inequality_ratio(&u, 3).unwrap();
        assert!(d.max.abs() < 1e-9);
        assert!(d.excluded > 0);
        assert!(diff_inequality_ratio(&u, 5).is_err());
    }
}
