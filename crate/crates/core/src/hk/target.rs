use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix4, Vector3};

use super::sphere::{HolomorphicSphere, SphereGrid, SphereMap};
use super::structure::HkStructure;
use crate::error::{input, Error, Result};
use crate::quaternion::Quaternion;

/// Coordinate chart on a hyperkähler target.
pub trait TargetChart: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn structure_at(&self, p: &[f64]) -> Result<HkStructure>;

    fn metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.structure_at(p)?.metric)
    }

    fn holomorphic_spheres(&self) -> &[HolomorphicSphere];

    /// Coordinate difference `to − from`, reduced modulo the chart's periods.
    fn displacement(&self, from: &[f64], to: &[f64]) -> Vec<f64> {
        to.iter().zip(from).map(|(b, a)| b - a).collect()
    }
}

/// `ℍⁿ` or the torus `ℝ⁴ⁿ/ℤ⁴ⁿ` with the flat structure.
#[derive(Clone, Debug)]
pub struct FlatTarget {
    name: String,
    pub n: usize,
    pub periodic: bool,
    structure: HkStructure,
}

impl FlatTarget {
    pub fn structure(&self) -> &HkStructure {
        &self.structure
    }
}

pub fn flat_quaternion_target(n: usize, periodic: bool) -> FlatTarget {
    let name = if periodic { "flat-t4" } else { "flat-h" };
    FlatTarget { name: name.into(), n, periodic, structure: HkStructure::flat(n) }
}

impl TargetChart for FlatTarget {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        4 * self.n
    }
    fn structure_at(&self, p: &[f64]) -> Result<HkStructure> {
        if p.len() != self.dim() {
            return input(format!("expected {} coordinates, got {}", self.dim(), p.len()));
        }
        Ok(self.structure.clone())
    }
    fn metric_at(&self, _p: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.structure.metric.clone())
    }
    fn holomorphic_spheres(&self) -> &[HolomorphicSphere] {
        &[]
    }
    fn displacement(&self, from: &[f64], to: &[f64]) -> Vec<f64> {
        to.iter()
            .zip(from)
            .map(|(b, a)| {
                let d = b - a;
                if self.periodic {
                    d - d.round()
                } else {
                    d
                }
            })
            .collect()
    }
}

/// Two-center Gibbons–Hawking chart `(x₁, x₂, x₃, θ)`, `θ` of period `2π`.
///
/// Centers at `(±d/2, 0, 0)` with `d = a²/2`, so the bolt has area `πa²`.
#[derive(Clone, Debug)]
pub struct EguchiHanson {
    pub scale: f64,
    pub separation: f64,
    spheres: Vec<HolomorphicSphere>,
}

pub fn eguchi_hanson_target(a: f64) -> Result<EguchiHanson> {
    if !(a > 0.0) || !a.is_finite() {
        return input(format!("Eguchi–Hanson scale must be positive, got {a}"));
    }
    let d = 0.5 * a * a;
    let mut eh = EguchiHanson { scale: a, separation: d, spheres: Vec::new() };
    let bolt = Arc::new(Bolt { separation: d });
    let area = sphere_area(&eh, bolt.as_ref(), &SphereGrid::new(128, 256))?;
    eh.spheres.push(HolomorphicSphere {
        label: "bolt".into(),
        xi: Vector3::new(-1.0, 0.0, 0.0),
        map: bolt,
        area,
    });
    Ok(eh)
}

impl EguchiHanson {
    fn centers(&self) -> [f64; 2] {
        [0.5 * self.separation, -0.5 * self.separation]
    }

    /// Harmonic function `V` and connection coefficients `A` at `x`.
    pub fn potential(&self, x: &[f64]) -> Result<(f64, Vector3<f64>)> {
        let d = self.separation;
        let perp2 = x[1] * x[1] + x[2] * x[2];
        let mut v = 0.0;
        let mut f = 0.0;
        for c in self.centers() {
            let r = ((x[0] - c).powi(2) + perp2).sqrt();
            if r == 0.0 || !r.is_finite() {
                return Err(Error::Domain(format!("point {:?} is a Gibbons–Hawking center", &x[..3])));
            }
            v += 0.5 / r;
            f -= 0.5 * (x[0] - c) / r;
        }
        let a = if perp2 < 1e-24 * d * d {
            if f.abs() > 1e-9 {
                return Err(Error::Domain(format!("point {:?} lies on a Dirac string", &x[..3])));
            }
            Vector3::zeros()
        } else {
            Vector3::new(0.0, -f * x[2] / perp2, f * x[1] / perp2)
        };
        Ok((v, a))
    }

    /// Coframe `J` with rows `(E₀, E₁, E₂, E₃)`, so that `G = JᵀJ`.
    fn coframe(&self, p: &[f64]) -> Result<Matrix4<f64>> {
        let (v, a) = self.potential(p)?;
        let s = v.sqrt();
        let mut j = Matrix4::zeros();
        j[(0, 0)] = a[0] / s;
        j[(0, 1)] = a[1] / s;
        j[(0, 2)] = a[2] / s;
        j[(0, 3)] = 1.0 / s;
        for k in 0..3 {
            j[(k + 1, k)] = s;
        }
        Ok(j)
    }
}

impl TargetChart for EguchiHanson {
    fn name(&self) -> &str {
        "eguchi-hanson"
    }
    fn dim(&self) -> usize {
        4
    }
    fn structure_at(&self, p: &[f64]) -> Result<HkStructure> {
        if p.len() != 4 {
            return input(format!("expected 4 coordinates, got {}", p.len()));
        }
        let j = self.coframe(p)?;
        let jinv = j.try_inverse().ok_or_else(|| Error::Domain("degenerate coframe".into()))?;
        let metric = j.transpose() * j;
        let complex = [0, 1, 2].map(|a| {
            let m = jinv * Quaternion::UNITS[a].left_matrix() * j;
            DMatrix::from_iterator(4, 4, m.iter().copied())
        });
        HkStructure::new(DMatrix::from_iterator(4, 4, metric.iter().copied()), complex)
    }
    fn metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let j = self.coframe(p)?;
        let m = j.transpose() * j;
        Ok(DMatrix::from_iterator(4, 4, m.iter().copied()))
    }
    fn holomorphic_spheres(&self) -> &[HolomorphicSphere] {
        &self.spheres
    }
    fn displacement(&self, from: &[f64], to: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = to.iter().zip(from).map(|(b, a)| b - a).collect();
        d[3] -= 2.0 * PI * (d[3] / (2.0 * PI)).round();
        d
    }
}

/// The bolt over the inter-center segment.
#[derive(Clone, Debug)]
pub struct Bolt {
    pub separation: f64,
}

impl SphereMap for Bolt {
    fn target_dim(&self) -> usize {
        4
    }
    fn eval(&self, p: &Vector3<f64>) -> Vec<f64> {
        vec![-0.5 * self.separation * p[0], 0.0, 0.0, p[2].atan2(p[1])]
    }
    fn push_forward(&self, p: &Vector3<f64>, t: &Vector3<f64>) -> Vec<f64> {
        let r2 = p[1] * p[1] + p[2] * p[2];
        let dth = if r2 > 0.0 { (p[1] * t[2] - p[2] * t[1]) / r2 } else { 0.0 };
        vec![-0.5 * self.separation * t[0], 0.0, 0.0, dth]
    }
}

/// Quadrature area `∫ √det(z*G)` of a sphere map.
pub fn sphere_area(chart: &dyn TargetChart, z: &dyn SphereMap, grid: &SphereGrid) -> Result<f64> {
    let mut area = 0.0;
    for ((p, (e1, e2)), w) in grid.points.iter().zip(&grid.frames).zip(&grid.weights) {
        let g = chart.metric_at(&z.eval(p))?;
        let a = nalgebra::DVector::from_vec(z.push_forward(p, e1));
        let b = nalgebra::DVector::from_vec(z.push_forward(p, e2));
        let gaa = (a.transpose() * &g * &a)[(0, 0)];
        let gbb = (b.transpose() * &g * &b)[(0, 0)];
        let gab = (a.transpose() * &g * &b)[(0, 0)];
        area += w * (gaa * gbb - gab * gab).max(0.0).sqrt();
    }
    Ok(area)
}

/// Quadrature energy `∫ |dz|²` of a sphere map.
pub fn sphere_energy(chart: &dyn TargetChart, z: &dyn SphereMap, grid: &SphereGrid) -> Result<f64> {
    let mut e = 0.0;
    for ((p, (e1, e2)), w) in grid.points.iter().zip(&grid.frames).zip(&grid.weights) {
        let g = chart.metric_at(&z.eval(p))?;
        for t in [e1, e2] {
            let a = nalgebra::DVector::from_vec(z.push_forward(p, t));
            e += w * (a.transpose() * &g * &a)[(0, 0)];
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_target_is_constant_identity() {
        let t = flat_quaternion_target(2, false);
        let h = t.structure_at(&[0.3; 8]).unwrap();
        assert_eq!(h.metric, DMatrix::identity(8, 8));
        let sq = &h.complex[0] * &h.complex[0] + DMatrix::identity(8, 8);
        assert_eq!(sq.norm(), 0.0);
        assert!(t.holomorphic_spheres().is_empty());
        assert_eq!(t.name(), "flat-h");
    }

    #[test]
    fn torus_displacement_wraps() {
        let t = flat_quaternion_target(1, true);
        let d = t.displacement(&[0.95, 0.0, 0.0, 0.0], &[0.05, 0.0, 0.0, 0.0]);
        assert!((d[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn eguchi_hanson_invariants_at_random_points() {
        let eh = eguchi_hanson_target(1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-PI..PI),
            ];
            let h = eh.structure_at(&p).unwrap();
            let r = h.residuals();
            assert!(r.max() < 1e-8, "{r:?} at {p:?}");
            for _ in 0..3 {
                let xi = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize();
                let c = h.complex_structure(&xi).unwrap();
                assert!((&c * &c + DMatrix::identity(4, 4)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn eguchi_hanson_rejects_centers() {
        let eh = eguchi_hanson_target(1.0).unwrap();
        let d = eh.separation;
        assert!(matches!(eh.structure_at(&[0.5 * d, 0.0, 0.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(eh.structure_at(&[2.0 * d, 0.0, 0.0, 0.0]), Err(Error::Domain(_))));
        assert!(eh.structure_at(&[0.1 * d, 0.0, 0.0, 1.0]).is_ok());
        assert!(eguchi_hanson_target(0.0).is_err());
    }

    /// `dω_a = 0`, checked by centered differences of the coefficient matrices.
    #[test]
    fn kahler_forms_are_closed() {
        let eh = eguchi_hanson_target(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-4;
        for _ in 0..50 {
            let p = [rng.gen_range(-1.0..1.0), rng.gen_range(0.2..1.0), rng.gen_range(-1.0..1.0), 0.3];
            let deriv = |k: usize| -> [DMatrix<f64>; 3] {
                let mut a = p;
                let mut b = p;
                a[k] += h;
                b[k] -= h;
                let sa = eh.structure_at(&a).unwrap();
                let sb = eh.structure_at(&b).unwrap();
                [0, 1, 2].map(|c| (&sa.kahler[c] - &sb.kahler[c]) / (2.0 * h))
            };
            let ds: Vec<_> = (0..4).map(deriv).collect();
            for c in 0..3 {
                for i in 0..4 {
                    for j in (i + 1)..4 {
                        for k in (j + 1)..4 {
                            let dw = ds[i][c][(j, k)] - ds[j][c][(i, k)] + ds[k][c][(i, j)];
                            assert!(dw.abs() < 1e-5, "dω_{c} ({i}{j}{k}) = {dw} at {p:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bolt_area_is_quadratic_in_scale() {
        let a1 = eguchi_hanson_target(1.0).unwrap().holomorphic_spheres()[0].area;
        let a2 = eguchi_hanson_target(2.0).unwrap().holomorphic_spheres()[0].area;
        assert!((a1 - PI).abs() < 1e-3 * PI, "{a1}");
        assert!((a2 / a1 - 4.0).abs() < 1e-6);
    }

    #[test]
    fn bolt_energy_is_twice_area() {
        let eh = eguchi_hanson_target(1.0).unwrap();
        let s = &eh.holomorphic_spheres()[0];
        let e = sphere_energy(&eh, s.map.as_ref(), &SphereGrid::new(64, 128)).unwrap();
        assert!((e - 2.0 * s.area).abs() < 1e-3 * e);
    }
}
