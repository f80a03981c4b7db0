use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

/// A map from the round unit sphere into chart coordinates.
pub trait SphereMap: Send + Sync {
    fn target_dim(&self) -> usize;

    fn eval(&self, p: &Vector3<f64>) -> Vec<f64>;

    /// Push-forward of the tangent vector `t` at `p`.
    ///
    /// The default differentiates along the great circle through `p` in direction `t`.
    fn push_forward(&self, p: &Vector3<f64>, t: &Vector3<f64>) -> Vec<f64> {
        let n = t.norm();
        if n == 0.0 {
            return vec![0.0; self.target_dim()];
        }
        let u = t / n;
        let s: f64 = 1e-5;
        let a = self.eval(&(p * s.cos() + u * s.sin()));
        let b = self.eval(&(p * s.cos() - u * s.sin()));
        a.iter().zip(&b).map(|(x, y)| n * (x - y) / (2.0 * s)).collect()
    }
}

/// A declared holomorphic sphere of a target chart.
#[derive(Clone)]
pub struct HolomorphicSphere {
    pub label: String,
    pub xi: Vector3<f64>,
    pub map: Arc<dyn SphereMap>,
    pub area: f64,
}

impl std::fmt::Debug for HolomorphicSphere {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HolomorphicSphere")
            .field("label", &self.label)
            .field("xi", &self.xi)
            .field("area", &self.area)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub struct ConstantSphere {
    pub value: Vec<f64>,
}

impl SphereMap for ConstantSphere {
    fn target_dim(&self) -> usize {
        self.value.len()
    }
    fn eval(&self, _p: &Vector3<f64>) -> Vec<f64> {
        self.value.clone()
    }
    fn push_forward(&self, _p: &Vector3<f64>, _t: &Vector3<f64>) -> Vec<f64> {
        vec![0.0; self.value.len()]
    }
}

/// `p ↦ z(R p)` for a rotation `R`.
#[derive(Clone)]
pub struct RotatedSphere {
    pub inner: Arc<dyn SphereMap>,
    pub rotation: Matrix3<f64>,
}

impl SphereMap for RotatedSphere {
    fn target_dim(&self) -> usize {
        self.inner.target_dim()
    }
    fn eval(&self, p: &Vector3<f64>) -> Vec<f64> {
        self.inner.eval(&(self.rotation * p))
    }
    fn push_forward(&self, p: &Vector3<f64>, t: &Vector3<f64>) -> Vec<f64> {
        self.inner.push_forward(&(self.rotation * p), &(self.rotation * t))
    }
}

/// Midpoint latitude/longitude grid on the unit sphere with an oriented orthonormal
/// tangent frame `(e_θ, e_φ)`, `e_θ × e_φ` the outward normal.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    pub points: Vec<Vector3<f64>>,
    pub frames: Vec<(Vector3<f64>, Vector3<f64>)>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let dt = PI / n_theta as f64;
        let dp = 2.0 * PI / n_phi as f64;
        let mut points = Vec::with_capacity(n_theta * n_phi);
        let mut frames = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for a in 0..n_theta {
            let th = (a as f64 + 0.5) * dt;
            let (st, ct) = th.sin_cos();
            for b in 0..n_phi {
                let ph = (b as f64 + 0.5) * dp;
                let (sp, cp) = ph.sin_cos();
                points.push(Vector3::new(st * cp, st * sp, ct));
                frames.push((Vector3::new(ct * cp, ct * sp, -st), Vector3::new(-sp, cp, 0.0)));
                weights.push(st * dt * dp);
            }
        }
        Self { points, frames, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `ℂ ∪ {∞}`, identified with the unit sphere by stereographic projection from `−e₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RiemannPoint {
    Finite(f64, f64),
    Infinity,
}

impl RiemannPoint {
    pub fn to_sphere(self) -> Vector3<f64> {
        match self {
            RiemannPoint::Infinity => Vector3::new(-1.0, 0.0, 0.0),
            RiemannPoint::Finite(x, y) => {
                let r2 = x * x + y * y;
                let d = 1.0 + r2;
                Vector3::new((1.0 - r2) / d, 2.0 * x / d, 2.0 * y / d)
            }
        }
    }

    pub fn from_sphere(p: &Vector3<f64>) -> Self {
        let d = 1.0 + p[0];
        if d <= 1e-300 {
            RiemannPoint::Infinity
        } else {
            RiemannPoint::Finite(p[1] / d, p[2] / d)
        }
    }
}

/// `s_λ(w) = λw` on `ℂ ∪ {∞}`.
pub fn sphere_scaling(lambda: f64, p: RiemannPoint) -> RiemannPoint {
    match p {
        RiemannPoint::Infinity => RiemannPoint::Infinity,
        RiemannPoint::Finite(x, y) => RiemannPoint::Finite(lambda * x, lambda * y),
    }
}

/// `s_λ` acting on the unit sphere, with its differential applied to `t`.
///
/// Uses the chart from `+e₁` on the southern half so that points near `−e₁` stay accurate.
pub fn sphere_scaling_point(lambda: f64, p: &Vector3<f64>, t: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    if p[0] >= 0.0 {
        let d = 1.0 + p[0];
        let (x, y) = (p[1] / d, p[2] / d);
        let (dx, dy) = ((t[1] * d - p[1] * t[0]) / (d * d), (t[2] * d - p[2] * t[0]) / (d * d));
        let (q, dq) = inverse_stereo(lambda * x, lambda * y, lambda * dx, lambda * dy);
        (q, dq)
    } else {
        // w̃ = 1/w = (p2 − i p3)/(1 − p1), and s_λ acts as w̃ ↦ w̃/λ
        let d = 1.0 - p[0];
        let (x, y) = (p[1] / d, -p[2] / d);
        let (dx, dy) = ((t[1] * d + p[1] * t[0]) / (d * d), (-t[2] * d - p[2] * t[0]) / (d * d));
        let (q, dq) = inverse_stereo(x / lambda, y / lambda, dx / lambda, dy / lambda);
        // map back through the second chart: p1 ↦ −p1, p3 ↦ −p3
        (Vector3::new(-q[0], q[1], -q[2]), Vector3::new(-dq[0], dq[1], -dq[2]))
    }
}

fn inverse_stereo(x: f64, y: f64, dx: f64, dy: f64) -> (Vector3<f64>, Vector3<f64>) {
    let r2 = x * x + y * y;
    let d = 1.0 + r2;
    let dr2 = 2.0 * (x * dx + y * dy);
    let p = Vector3::new((1.0 - r2) / d, 2.0 * x / d, 2.0 * y / d);
    let dp = Vector3::new(
        (-dr2 * d - (1.0 - r2) * dr2) / (d * d),
        (2.0 * dx * d - 2.0 * x * dr2) / (d * d),
        (2.0 * dy * d - 2.0 * y * dr2) / (d * d),
    );
    (p, dp)
}

/// `z ∘ s_λ` as a sphere map.
#[derive(Clone)]
pub struct ScaledSphere {
    pub inner: Arc<dyn SphereMap>,
    pub lambda: f64,
}

impl SphereMap for ScaledSphere {
    fn target_dim(&self) -> usize {
        self.inner.target_dim()
    }
    fn eval(&self, p: &Vector3<f64>) -> Vec<f64> {
        let (q, _) = sphere_scaling_point(self.lambda, p, &Vector3::zeros());
        self.inner.eval(&q)
    }
    fn push_forward(&self, p: &Vector3<f64>, t: &Vector3<f64>) -> Vec<f64> {
        let (q, dq) = sphere_scaling_point(self.lambda, p, t);
        self.inner.push_forward(&q, &dq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng) -> RiemannPoint {
        RiemannPoint::Finite(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))
    }

    #[test]
    fn infinity_is_fixed() {
        assert_eq!(sphere_scaling(0.3, RiemannPoint::Infinity), RiemannPoint::Infinity);
        let (q, _) = sphere_scaling_point(0.3, &Vector3::new(-1.0, 0.0, 0.0), &Vector3::zeros());
        assert!((q - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unit_scale_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            assert_eq!(sphere_scaling(1.0, p), p);
        }
    }

    #[test]
    fn group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let (l, m) = (rng.gen_range(0.1..4.0), rng.gen_range(0.1..4.0));
            let a = sphere_scaling(l, sphere_scaling(m, p)).to_sphere();
            let b = sphere_scaling(l * m, p).to_sphere();
            assert!((a - b).norm() < 1e-12);
            let s = p.to_sphere();
            let (c, _) = sphere_scaling_point(l, &sphere_scaling_point(m, &s, &Vector3::zeros()).0, &Vector3::zeros());
            assert!((c - b).norm() < 1e-12);
        }
    }

    #[test]
    fn stereographic_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let back = RiemannPoint::from_sphere(&p.to_sphere());
            match (p, back) {
                (RiemannPoint::Finite(a, b), RiemannPoint::Finite(c, d)) => {
                    assert!((a - c).abs() < 1e-12 && (b - d).abs() < 1e-12)
                }
                _ => panic!("lost a finite point"),
            }
        }
    }

    #[test]
    fn scaling_differential_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let p = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize();
            let t0 = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let t = t0 - p * p.dot(&t0);
            let lam = rng.gen_range(0.2..3.0);
            let (_, dq) = sphere_scaling_point(lam, &p, &t);
            let s = 1e-6;
            let a = sphere_scaling_point(lam, &(p + t * s).normalize(), &Vector3::zeros()).0;
            let b = sphere_scaling_point(lam, &(p - t * s).normalize(), &Vector3::zeros()).0;
            let fd = (a - b) / (2.0 * s);
            assert!((fd - dq).norm() < 1e-5 * (1.0 + dq.norm()), "{fd} vs {dq}");
        }
    }

    #[test]
    fn sphere_grid_area() {
        let g = SphereGrid::new(64, 128);
        let total: f64 = g.weights.iter().sum();
        assert!((total - 4.0 * PI).abs() < 5e-3);
        for (p, (a, b)) in g.points.iter().zip(&g.frames) {
            assert!((a.cross(b) - p).norm() < 1e-12);
        }
    }
}
