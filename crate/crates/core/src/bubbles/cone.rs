use nalgebra::{DVector, Matrix3, Vector3, Vector4};
use serde::Serialize;

use crate::domains::GridKind;
use crate::error::{input, Result};
use crate::fueter::SectionSample;
use crate::hk::SphereGrid;
use crate::measures::{smoothed_indicator, RadonMeasureApprox};

/// Rays of a tangent cone with their line densities, plus an optional map part
/// given as `(point on S², |du_*|²·dA)` samples.
#[derive(Clone, Debug, Default, Serialize)]
pub struct TangentConeSample {
    pub rays: Vec<(Vector3<f64>, f64)>,
    pub map_part: Option<Vec<(Vector3<f64>, f64)>>,
}

impl TangentConeSample {
    pub fn new(rays: Vec<(Vector3<f64>, f64)>) -> Result<Self> {
        for (i, (x, w)) in rays.iter().enumerate() {
            if !(*w > 0.0) {
                return input(format!("ray weights must be positive, got {w}"));
            }
            if (x.norm() - 1.0).abs() > 1e-9 {
                return input("ray directions must be unit vectors");
            }
            if rays[..i].iter().any(|(y, _)| (x - y).norm() < 1e-12) {
                return input("ray directions must be distinct");
            }
        }
        Ok(Self { rays, map_part: None })
    }
}

/// `|Σ x·Θ_*(x) + ∫_{S²} x·|du_*|²|`.
pub fn balancing_deficit(cone: &TangentConeSample) -> f64 {
    let mut s: Vector3<f64> = cone.rays.iter().map(|(x, w)| x * *w).sum();
    if let Some(m) = &cone.map_part {
        s += m.iter().map(|(x, e)| x * *e).sum::<Vector3<f64>>();
    }
    s.norm()
}

/// One ray found by [`tangent_cone`]: direction, mean weight and the weight at each radius.
#[derive(Clone, Debug, Serialize)]
pub struct ConeRay {
    pub direction: Vector3<f64>,
    pub weight: f64,
    pub weights: Vec<f64>,
    /// `(max − min)/mean` of `weights`.
    pub spread: f64,
}

/// Rays of the rescaled measures `μ(x + ρ·)/ρ` at the given radii.
///
/// The weight of direction `ω` at radius `ρ` is `μ(B_{κρ}(x + ρω))/(2κρ)`, the line density seen
/// by a small ball on the ray. Directions are taken from a `n × 2n` sphere grid; a ray is kept
/// when its mean weight exceeds `threshold` and nearby directions within `3κ` are suppressed;
/// each kept direction is then refined by a local search.
pub fn tangent_cone(
    mu: &RadonMeasureApprox,
    x: &Vector4<f64>,
    radii: &[f64],
    kappa: f64,
    n: usize,
    threshold: f64,
) -> Result<(TangentConeSample, Vec<ConeRay>)> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return input("tangent cone needs positive radii");
    }
    if !(kappa > 0.0 && kappa < 0.5) {
        return input("kappa must lie in (0, 0.5)");
    }
    let dirs = SphereGrid::new(n.max(4), 2 * n.max(4)).points;
    let profile = |d: &Vector3<f64>| -> Vec<f64> {
        radii
            .iter()
            .map(|&rho| {
                let c = x + Vector4::new(d.x, d.y, d.z, 0.0) * rho;
                mu.ball_mass(&c, kappa * rho) / (2.0 * kappa * rho)
            })
            .collect()
    };
    let table: Vec<Vec<f64>> = dirs.iter().map(profile).collect();
    let mean = |w: &Vec<f64>| w.iter().sum::<f64>() / w.len() as f64;
    let step0 = std::f64::consts::PI / n.max(4) as f64;
    let mut order: Vec<usize> = (0..dirs.len()).collect();
    order.sort_by(|&a, &b| mean(&table[b]).total_cmp(&mean(&table[a])).then(a.cmp(&b)));
    let mut rays: Vec<ConeRay> = Vec::new();
    for i in order {
        let m = mean(&table[i]);
        // grid directions can miss a ray by half a cell, so refine before thresholding
        if m < 0.1 * threshold {
            break;
        }
        if rays.iter().any(|r| r.direction.angle(&dirs[i]) < 3.0 * kappa) {
            continue;
        }
        // pattern search on the sphere for the best-aligned direction
        let mut d = dirs[i];
        let mut best = m;
        let mut step = step0;
        while step > 1e-3 * step0 {
            let e1 = d.cross(&if d.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() }).normalize();
            let e2 = d.cross(&e1);
            let mut moved = false;
            for t in [e1, -e1, e2, -e2] {
                let c = (d + t * step).normalize();
                let mc = mean(&profile(&c));
                if mc > best {
                    best = mc;
                    d = c;
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if best < threshold || rays.iter().any(|r| r.direction.angle(&d) < 3.0 * kappa) {
            continue;
        }
        let w = profile(&d);
        let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = w.iter().cloned().fold(0.0, f64::max);
        rays.push(ConeRay { direction: d, weight: best, weights: w, spread: (hi - lo) / best });
    }
    let sample = TangentConeSample { rays: rays.iter().map(|r| (r.direction, r.weight)).collect(), map_part: None };
    Ok((sample, rays))
}

/// A `C¹` test weight with compact support in the ball of radius `support_radius`.
pub trait TestWeight: Sync {
    fn value(&self, y: &Vector3<f64>) -> f64;
    fn gradient(&self, y: &Vector3<f64>) -> Vector3<f64>;
    fn support_radius(&self) -> f64;
}

/// `φ(y) = 16 b²` with `b = s(1 − s)`, `s = (|y| − r0)/(r1 − r0)` inside the annulus, zero outside.
#[derive(Clone, Copy, Debug)]
pub struct AnnulusBump {
    pub r0: f64,
    pub r1: f64,
}

impl AnnulusBump {
    fn coord(&self, y: &Vector3<f64>) -> Option<f64> {
        let s = (y.norm() - self.r0) / (self.r1 - self.r0);
        (s > 0.0 && s < 1.0).then_some(s)
    }
}

impl TestWeight for AnnulusBump {
    fn value(&self, y: &Vector3<f64>) -> f64 {
        self.coord(y).map_or(0.0, |s| 16.0 * (s * (1.0 - s)).powi(2))
    }
    fn gradient(&self, y: &Vector3<f64>) -> Vector3<f64> {
        match self.coord(y) {
            Some(s) => {
                let b = s * (1.0 - s);
                let db = 32.0 * b * (1.0 - 2.0 * s) / (self.r1 - self.r0);
                y / y.norm() * db
            }
            None => Vector3::zeros(),
        }
    }
    fn support_radius(&self) -> f64 {
        self.r1
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConicalDeviation {
    pub lhs: f64,
    pub rhs_bound: f64,
    /// `lhs ≤ C·rhs_bound` up to a relative slack of 1e-9, with `C` = [`CONICAL_CONSTANT`].
    pub holds: bool,
}

/// Constant in front of the majorant; the identity behind it is exact for stationary maps.
pub const CONICAL_CONSTANT: f64 = 1.0;

const T_NODES: usize = 16;

/// Compares `∫φ|∇(u∘s_R)|²` with `∫φ|∇u|²` and bounds the difference by
/// `∫_1^R (2/t) ∫ |∇φ(y)| |y| |∂_r u_t(y)| |∇u_t(y)| dy dt` with `u_t = u(t·)`.
pub fn conical_deviation(u: &SectionSample, phi: &dyn TestWeight, big_r: f64) -> Result<ConicalDeviation> {
    if u.grid.kind != GridKind::Ball3 {
        return input("conical deviation is defined on ball3 samples");
    }
    if !(big_r >= 1.0) {
        return input(format!("R must be at least 1, got {big_r}"));
    }
    let room = u.grid.max_radius(&Vector4::zeros());
    if big_r * phi.support_radius() > room + 1e-12 {
        return input(format!("R·supp φ reaches {} beyond the domain radius {room}", big_r * phi.support_radius()));
    }
    let pts: Vec<(Vector3<f64>, f64, f64, Vector3<f64>)> = u
        .grid
        .points
        .iter()
        .zip(&u.grid.weights)
        .filter_map(|(p, w)| {
            let y = p.xyz();
            let f = phi.value(&y);
            let g = phi.gradient(&y);
            (f != 0.0 || g.norm() != 0.0).then_some((y, *w, f, g))
        })
        .collect();
    // e(t) = t²|∇u|²(ty), radial(t) = t|∂_r u|(ty)
    let at = |y: &Vector3<f64>, t: f64| -> Result<(f64, f64)> {
        let p = Vector4::new(t * y.x, t * y.y, t * y.z, 0.0);
        let val = u.map.eval(&p)?;
        let du = u.derivatives_at(&p)?;
        let g = u.target.metric_at(&val)?;
        let e = crate::fueter::density_from(&g, &du);
        let n = y / y.norm();
        let mut dr = DVector::zeros(u.dim);
        for a in 0..3 {
            dr += DVector::from_column_slice(&du[a]) * n[a];
        }
        let r2 = (dr.transpose() * g * &dr)[(0, 0)];
        Ok((t * t * e, t * r2.max(0.0).sqrt()))
    };
    let mut i1 = 0.0;
    let mut ir = 0.0;
    for (y, w, f, _) in &pts {
        if *f != 0.0 {
            i1 += w * f * at(y, 1.0)?.0;
            ir += w * f * at(y, big_r)?.0;
        }
    }
    let lhs = (ir - i1).abs();
    let mut rhs = 0.0;
    if big_r > 1.0 {
        // composite Simpson in t
        let dt = (big_r - 1.0) / T_NODES as f64;
        for k in 0..=T_NODES {
            let t = 1.0 + k as f64 * dt;
            let c = if k == 0 || k == T_NODES { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            let mut inner = 0.0;
            for (y, w, _, g) in &pts {
                let gn = g.norm();
                if gn == 0.0 {
                    continue;
                }
                let (e, radial) = at(y, t)?;
                inner += w * gn * y.norm() * radial * e.sqrt();
            }
            rhs += c * dt / 3.0 * 2.0 / t * inner;
        }
    }
    let holds = lhs <= CONICAL_CONSTANT * rhs + 1e-9 * (i1.abs() + ir.abs()) + 1e-300;
    Ok(ConicalDeviation { lhs, rhs_bound: rhs, holds })
}

/// A vector field on the domain with its Jacobian `∂_j v_i`.
pub trait VectorField: Sync {
    fn value(&self, y: &Vector3<f64>) -> Vector3<f64>;
    fn jacobian(&self, y: &Vector3<f64>) -> Matrix3<f64>;
}

/// `v(y) = b + A y`.
#[derive(Clone, Copy, Debug)]
pub struct AffineField {
    pub b: Vector3<f64>,
    pub a: Matrix3<f64>,
}

impl AffineField {
    pub fn constant(b: Vector3<f64>) -> Self {
        Self { b, a: Matrix3::zeros() }
    }
}

impl VectorField for AffineField {
    fn value(&self, y: &Vector3<f64>) -> Vector3<f64> {
        self.b + self.a * y
    }
    fn jacobian(&self, _y: &Vector3<f64>) -> Matrix3<f64> {
        self.a
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryFunctional {
    pub lhs: f64,
    pub rhs_bound: f64,
    /// `∫_{∂B_r} |∇u|²`, the natural scale of `lhs`.
    pub boundary_energy: f64,
}

/// `|∫_{∂B_r(x)} ⟨v,∂_r⟩|∇u|² − 2⟨∇_r u, ∇_v u⟩|` against `∫_{B_r(x)} |T|·|∇v|`,
/// with `T = |∇u|² id − 2 duᵀG du` the stress-energy tensor.
///
/// The surface integral uses a midpoint sphere grid with about one node per grid spacing and
/// derivatives in the sample's own mode.
pub fn balancing_boundary_functional(
    u: &SectionSample,
    x: &Vector4<f64>,
    r: f64,
    v: &dyn VectorField,
) -> Result<BoundaryFunctional> {
    if !matches!(u.grid.kind, GridKind::Ball3 | GridKind::Torus3) {
        return input("boundary functional is defined on flat three-dimensional samples");
    }
    if r < 2.0 * u.grid.h {
        return input(format!("sphere of radius {r} is not resolved by grid spacing {}", u.grid.h));
    }
    u.grid.check_ball(x, r)?;
    let n_theta = ((std::f64::consts::PI * r / u.grid.h).ceil() as usize).max(8);
    let sphere = SphereGrid::new(n_theta, 2 * n_theta);
    let mut lhs = 0.0;
    let mut scale = 0.0;
    for (n, w) in sphere.points.iter().zip(&sphere.weights) {
        let p = x + Vector4::new(n.x, n.y, n.z, 0.0) * r;
        let val = u.map.eval(&p)?;
        let du = u.derivatives_at(&p)?;
        let g = u.target.metric_at(&val)?;
        let vv = v.value(&(p - x).xyz());
        let comb = |c: &Vector3<f64>| {
            let mut d = DVector::zeros(u.dim);
            for a in 0..3 {
                d += DVector::from_column_slice(&du[a]) * c[a];
            }
            d
        };
        let e = crate::fueter::density_from(&g, &du);
        let dn = comb(n);
        let dv = comb(&vv);
        let cross = (dn.transpose() * &g * dv)[(0, 0)];
        let da = w * r * r;
        lhs += da * (vv.dot(n) * e - 2.0 * cross);
        scale += da * e;
    }
    let mut rhs = 0.0;
    let wr = u.grid.h.min(0.5 * r);
    for i in u.grid.ball_indices(x, r + 0.5 * wr) {
        let d = u.grid.displacement(x, &u.grid.points[i]);
        let ind = smoothed_indicator(d.norm(), r, wr);
        let jac = v.jacobian(&d.xyz());
        let jn = jac.norm();
        if jn == 0.0 || ind == 0.0 {
            continue;
        }
        let m = u.derivative_matrix(i);
        let g = u.target.metric_at(u.value(i))?;
        let gram = m.transpose() * g * &m;
        let e = gram.trace();
        let t = nalgebra::DMatrix::<f64>::identity(3, 3) * e - gram * 2.0;
        rhs += ind * u.grid.weights[i] * t.norm() * jn;
    }
    Ok(BoundaryFunctional { lhs: lhs.abs(), rhs_bound: rhs, boundary_energy: scale })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::domains::build_grid;
    use crate::fueter::{AffineMap, FnMap, RadialExtension, SectionMap};
    use crate::hk::{flat_quaternion_target, SphereMap};

    struct Imaginary;
    impl SphereMap for Imaginary {
        fn target_dim(&self) -> usize {
            4
        }
        fn eval(&self, p: &Vector3<f64>) -> Vec<f64> {
            vec![0.0, p.x, p.y * p.z, p.z]
        }
    }

    fn ball(h: f64, extent: f64, map: Arc<dyn SectionMap>, fd: bool) -> SectionSample {
        let g = Arc::new(build_grid(GridKind::Ball3, h, extent).unwrap().subset(|p| p.norm() > 1e-12));
        let t = Arc::new(flat_quaternion_target(1, false));
        if fd {
            SectionSample::finite_difference(g, t, map).unwrap()
        } else {
            SectionSample::exact(g, t, map).unwrap()
        }
    }

    #[test]
    fn symmetric_cones_are_balanced() {
        let two = TangentConeSample::new(vec![(Vector3::x(), 1.5), (-Vector3::x(), 1.5)]).unwrap();
        assert!(balancing_deficit(&two) < 1e-12);
        let three: Vec<_> = (0..3)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 3.0;
                (Vector3::new(a.cos(), a.sin(), 0.0), 0.7)
            })
            .collect();
        assert!(balancing_deficit(&TangentConeSample::new(three).unwrap()) < 1e-12);
        let one = TangentConeSample::new(vec![(Vector3::z(), 2.5)]).unwrap();
        assert!((balancing_deficit(&one) - 2.5).abs() < 1e-15);
        assert!(TangentConeSample::new(vec![(Vector3::z(), 0.0)]).is_err());
    }

    #[test]
    fn conical_map_has_no_deviation() {
        let u = ball(1.0 / 16.0, 1.0, Arc::new(RadialExtension { z: Arc::new(Imaginary) }), false);
        let phi = AnnulusBump { r0: 0.2, r1: 0.45 };
        let c = conical_deviation(&u, &phi, 2.0).unwrap();
        assert!(c.rhs_bound > 0.0);
        assert!(c.lhs < 1e-9 * c.rhs_bound.max(1.0), "{c:?}");
    }

    #[test]
    fn linear_fueter_growth_is_bounded() {
        let u = ball(1.0 / 16.0, 1.0, Arc::new(AffineMap::linear_fueter()), false);
        let phi = AnnulusBump { r0: 0.2, r1: 0.45 };
        let c = conical_deviation(&u, &phi, 2.0).unwrap();
        let int_phi: f64 = u.grid.points.iter().zip(&u.grid.weights).map(|(p, w)| w * phi.value(&p.xyz())).sum();
        assert!((c.lhs - 2.0 * 3.0 * int_phi).abs() < 1e-9 * c.lhs);
        assert!(c.holds, "{c:?}");
        let k = conical_deviation(&ball(0.1, 1.0, Arc::new(AffineMap::constant(vec![1.0; 4])), false), &phi, 2.0).unwrap();
        assert_eq!((k.lhs, k.rhs_bound), (0.0, 0.0));
        assert!(conical_deviation(&u, &phi, 3.0).is_err());
    }

    fn exp_map() -> Arc<dyn SectionMap> {
        // holomorphic in ζ = x₃ + i x₂, hence Fueter
        Arc::new(FnMap::new(4, |x: &Vector4<f64>| {
            let m = x[2].exp();
            vec![m * x[1].cos(), m * x[1].sin(), 0.0, 0.0]
        }))
    }

    #[test]
    fn fueter_flux_vanishes_with_order_two() {
        let v = AffineField::constant(Vector3::new(0.3, 1.0, -0.5));
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| {
                let u = ball(h, 1.0, exp_map(), true);
                let b = balancing_boundary_functional(&u, &Vector4::zeros(), 0.5, &v).unwrap();
                assert_eq!(b.rhs_bound, 0.0);
                assert!(b.lhs < 0.05 * b.boundary_energy * 0.5);
                b.lhs
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.5, "{errs:?}");
        }
    }

    #[test]
    fn line_masses_give_constant_rays() {
        let h = 0.01;
        let dirs = [Vector3::x(), Vector3::new(-0.5, 0.75_f64.sqrt(), 0.0), Vector3::new(-0.5, -0.75_f64.sqrt(), 0.0)];
        let theta = [1.0, 2.0, 3.0];
        let mut atoms = Vec::new();
        for (d, t) in dirs.iter().zip(theta) {
            for k in 0..100 {
                let s = (k as f64 + 0.5) * h;
                atoms.push((Vector4::new(d.x * s, d.y * s, d.z * s, 0.0), t * h));
            }
        }
        let mu = RadonMeasureApprox::new(atoms, "rays", crate::measures::Metric::Euclidean).with_smoothing(h);
        let (cone, rays) = tangent_cone(&mu, &Vector4::zeros(), &[0.2, 0.4, 0.6], 0.1, 24, 0.5).unwrap();
        assert_eq!(cone.rays.len(), 3);
        for r in &rays {
            assert!(r.spread < 0.05, "{r:?}");
            let k = dirs.iter().position(|d| d.angle(&r.direction) < 0.15).unwrap();
            assert!((r.weight - theta[k]).abs() < 0.1 * theta[k], "{r:?}");
        }
    }
}
