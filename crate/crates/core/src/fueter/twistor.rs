use std::sync::Arc;

use nalgebra::{DVector, Vector3, Vector4};
use serde::Serialize;

use super::residual::fueter_residual_3d;
use super::section::{DerivativeMode, RadialExtension, SectionSample};
use crate::domains::{build_grid, GridKind};
use crate::error::Result;
use crate::hk::{SphereGrid, SphereMap, TargetChart};

/// `(‖dz∘j − I_ξ∘dz‖_{L²}, ∫|dz|²)` on a sphere grid.
pub fn twistor_residual(chart: &dyn TargetChart, z: &dyn SphereMap, xi: &Vector3<f64>, grid: &SphereGrid) -> Result<(f64, f64)> {
    let mut res = 0.0;
    let mut energy = 0.0;
    for ((p, (e1, e2)), w) in grid.points.iter().zip(&grid.frames).zip(&grid.weights) {
        let h = chart.structure_at(&z.eval(p))?;
        let i = h.complex_structure(xi)?;
        let a = DVector::from_vec(z.push_forward(p, e1));
        let b = DVector::from_vec(z.push_forward(p, e2));
        // j e_θ = e_φ
        let d = &b - &i * &a;
        res += w * h.norm_sqr(&d);
        energy += w * (h.norm_sqr(&a) + h.norm_sqr(&b));
    }
    Ok((res.max(0.0).sqrt(), energy))
}

#[derive(Clone, Debug, Serialize)]
pub struct RadialResidual {
    pub h: f64,
    pub l2: f64,
    pub max: f64,
    pub points: usize,
}

/// Fueter residual of `x ↦ z(x/|x|)` on the annulus `1 ≤ |x| ≤ 2`, restricted to directions kept
/// by `keep`.
pub fn radial_extension_residual(
    chart: Arc<dyn TargetChart>,
    z: Arc<dyn SphereMap>,
    h: f64,
    mode: DerivativeMode,
    keep: &dyn Fn(&Vector3<f64>) -> bool,
) -> Result<(RadialResidual, SectionSample)> {
    let ball = build_grid(GridKind::Ball3, h, 2.0)?;
    let annulus = ball.subset(|x: &Vector4<f64>| {
        let r = x.xyz().norm();
        (1.0..=2.0).contains(&r) && keep(&(x.xyz() / r))
    });
    let u = SectionSample::new(Arc::new(annulus), chart, Arc::new(RadialExtension { z }), mode)?;
    let f = fueter_residual_3d(&u)?;
    let l2 = f.norms.iter().zip(&u.grid.weights).map(|(n, w)| n * n * w).sum::<f64>().sqrt();
    let r = RadialResidual { h, l2, max: f.max_norm(), points: u.len() };
    Ok((r, u))
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistorReport {
    pub xi: [f64; 3],
    pub sphere_residual: f64,
    pub sphere_energy: f64,
    pub relative_residual: f64,
    pub radial_fueter_l2: f64,
}

/// Sphere ∂̄-residual of `z` for `I_ξ` together with the Fueter residual of its radial extension
/// over the directions where the chart is defined.
pub fn twistor_check(chart: Arc<dyn TargetChart>, z: Arc<dyn SphereMap>, xi: &Vector3<f64>, n: usize) -> Result<TwistorReport> {
    let grid = SphereGrid::new(n, n);
    let (res, energy) = twistor_residual(chart.as_ref(), z.as_ref(), xi, &grid)?;
    // directions where z lands on a chart singularity (a bolt pole on a Gibbons–Hawking center) are skipped
    let defined = {
        let (chart, z) = (chart.clone(), z.clone());
        move |n: &Vector3<f64>| chart.structure_at(&z.eval(n)).is_ok()
    };
    let (radial, _) = radial_extension_residual(chart, z, 0.125, DerivativeMode::Exact, &defined)?;
    Ok(TwistorReport {
        xi: [xi[0], xi[1], xi[2]],
        sphere_residual: res,
        sphere_energy: energy,
        relative_residual: if energy > 0.0 { res / energy.sqrt() } else { 0.0 },
        radial_fueter_l2: radial.l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hk::{eguchi_hanson_target, flat_quaternion_target, ConstantSphere};

    #[test]
    fn constant_sphere_is_holomorphic() {
        let t = flat_quaternion_target(1, false);
        let z = ConstantSphere { value: vec![1.0, 0.0, 0.0, 0.0] };
        let (r, e) = twistor_residual(&t, &z, &Vector3::x(), &SphereGrid::new(16, 16)).unwrap();
        assert_eq!((r, e), (0.0, 0.0));
    }

    #[test]
    fn bolt_is_holomorphic_for_declared_xi_only() {
        let eh = eguchi_hanson_target(1.0).unwrap();
        let s = eh.holomorphic_spheres()[0].clone();
        let g = SphereGrid::new(64, 64);
        let (r, e) = twistor_residual(&eh, s.map.as_ref(), &s.xi, &g).unwrap();
        assert!(r < 1e-6, "{r}");
        let (r2, _) = twistor_residual(&eh, s.map.as_ref(), &(-s.xi), &g).unwrap();
        assert!(r2 > 0.1);
        assert!((r2 - (2.0 * e).sqrt()).abs() < 1e-6 * r2);
    }

    #[test]
    fn twistor_check_skips_the_bolt_poles() {
        let eh: Arc<dyn TargetChart> = Arc::new(eguchi_hanson_target(1.0).unwrap());
        let s = eh.holomorphic_spheres()[0].clone();
        let r = twistor_check(eh, s.map, &s.xi, 32).unwrap();
        assert!(r.sphere_residual < 1e-6);
        assert!(r.radial_fueter_l2.is_finite() && r.radial_fueter_l2 > 0.0);
    }
}
