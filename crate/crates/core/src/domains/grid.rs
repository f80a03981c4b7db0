use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use super::index::SpatialIndex;
use crate::error::{input, Error, Result};
use crate::quaternion::Quaternion;

/// Default Mercator half-range `Σ` of the graded S³ grid.
pub const SPHERE3_DEFAULT_EXTENT: f64 = 10.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Ball3,
    Torus3,
    Sphere3,
    Flat4,
}

impl GridKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ball3" => Ok(GridKind::Ball3),
            "torus3" => Ok(GridKind::Torus3),
            "sphere3" => Ok(GridKind::Sphere3),
            "flat4" => Ok(GridKind::Flat4),
            other => input(format!("unsupported grid kind {other:?} (expected ball3, torus3, sphere3 or flat4)")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GridKind::Ball3 => "ball3",
            GridKind::Torus3 => "torus3",
            GridKind::Sphere3 => "sphere3",
            GridKind::Flat4 => "flat4",
        }
    }

    /// Number of frame directions.
    pub fn frame_len(self) -> usize {
        if self == GridKind::Flat4 {
            4
        } else {
            3
        }
    }
}

/// Sample points with quadrature weights on one of the built-in source manifolds.
///
/// Points live in `ℝ⁴`; three-dimensional flat domains leave the last coordinate zero.
/// For `sphere3` the points are unit quaternions `(w, x, y, z)`.
#[derive(Debug)]
pub struct DomainGrid {
    pub kind: GridKind,
    pub h: f64,
    pub extent: f64,
    pub points: Vec<Vector4<f64>>,
    pub weights: Vec<f64>,
    index: OnceLock<SpatialIndex>,
}

impl Clone for DomainGrid {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind,
            h: self.h,
            extent: self.extent,
            points: self.points.clone(),
            weights: self.weights.clone(),
            index: OnceLock::new(),
        }
    }
}

pub fn build_grid(kind: GridKind, h: f64, extent: f64) -> Result<DomainGrid> {
    if !(h > 0.0) || !h.is_finite() {
        return input(format!("grid spacing must be positive, got {h}"));
    }
    if !(extent >= 4.0 * h) {
        return input(format!("extent {extent} must be at least 4h = {}", 4.0 * h));
    }
    let (points, weights, h) = match kind {
        GridKind::Ball3 => ball3(h, extent),
        GridKind::Torus3 => torus3(h, extent),
        GridKind::Sphere3 => sphere3(h, extent),
        GridKind::Flat4 => flat4(h, extent),
    };
    Ok(DomainGrid { kind, h, extent, points, weights, index: OnceLock::new() })
}

fn ball3(h: f64, r: f64) -> (Vec<Vector4<f64>>, Vec<f64>, f64) {
    let n = (r / h).floor() as i64;
    let mut pts = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            for k in -n..=n {
                let p = Vector4::new(i as f64 * h, j as f64 * h, k as f64 * h, 0.0);
                if p.norm() <= r + 1e-12 {
                    pts.push(p);
                }
            }
        }
    }
    let w = vec![h * h * h; pts.len()];
    (pts, w, h)
}

fn torus3(h: f64, l: f64) -> (Vec<Vector4<f64>>, Vec<f64>, f64) {
    let n = (l / h).round().max(1.0) as usize;
    let h = l / n as f64;
    let mut pts = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                pts.push(Vector4::new(i as f64 * h, j as f64 * h, k as f64 * h, 0.0));
            }
        }
    }
    let w = vec![h * h * h; pts.len()];
    (pts, w, h)
}

fn flat4(h: f64, r: f64) -> (Vec<Vector4<f64>>, Vec<f64>, f64) {
    let n = (r / h).floor() as i64;
    let mut pts = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            for c in -n..=n {
                for d in -n..=n {
                    pts.push(Vector4::new(a as f64, b as f64, c as f64, d as f64) * h);
                }
            }
        }
    }
    let w = vec![h.powi(4); pts.len()];
    (pts, w, h)
}

/// Hopf coordinates `q = cos η e^{iα} + sin η e^{iβ} j` with `η` graded uniformly in
/// `σ = ln tan η ∈ [−Σ, Σ]`; volume element `sin²η cos²η dσ dα dβ`.
fn sphere3(h: f64, sigma_max: f64) -> (Vec<Vector4<f64>>, Vec<f64>, f64) {
    let ns = (2.0 * sigma_max / h).ceil() as usize;
    let hs = 2.0 * sigma_max / ns as f64;
    let na = (2.0 * PI / h).ceil() as usize;
    let ha = 2.0 * PI / na as f64;
    let mut pts = Vec::with_capacity(ns * na * na);
    let mut w = Vec::with_capacity(ns * na * na);
    for s in 0..ns {
        let sigma = -sigma_max + (s as f64 + 0.5) * hs;
        let eta = sigma.exp().atan();
        let (se, ce) = eta.sin_cos();
        let weight = se * se * ce * ce * hs * ha * ha;
        for a in 0..na {
            let (sa, ca) = (a as f64 * ha).sin_cos();
            for b in 0..na {
                let (sb, cb) = (b as f64 * ha + 0.5 * ha).sin_cos();
                // cos η e^{iα} + sin η e^{iβ} j = (cos η cos α, cos η sin α, sin η cos β, sin η sin β)
                pts.push(Vector4::new(ce * ca, ce * sa, se * cb, se * sb));
                w.push(weight);
            }
        }
    }
    (pts, w, h)
}

impl DomainGrid {
    /// The points of `self` satisfying `keep`, with their weights.
    pub fn subset(&self, keep: impl Fn(&Vector4<f64>) -> bool) -> DomainGrid {
        let (points, weights) = self
            .points
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| keep(p))
            .map(|(p, w)| (*p, *w))
            .unzip();
        DomainGrid { kind: self.kind, h: self.h, extent: self.extent, points, weights, index: OnceLock::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn frame_len(&self) -> usize {
        self.kind.frame_len()
    }

    /// Orthonormal frame at `x`: constant for flat domains, `v_a(q) = q·e_a` on S³.
    pub fn frame_at(&self, x: &Vector4<f64>) -> Vec<Vector4<f64>> {
        match self.kind {
            GridKind::Sphere3 => {
                let q = Quaternion::from_vector(x);
                Quaternion::UNITS.iter().map(|e| (q * *e).to_vector()).collect()
            }
            GridKind::Flat4 => (0..4).map(|a| Vector4::ith(a, 1.0)).collect(),
            _ => (0..3).map(|a| Vector4::ith(a, 1.0)).collect(),
        }
    }

    /// Flow of the `a`-th frame field for time `t`.
    pub fn flow(&self, x: &Vector4<f64>, a: usize, t: f64) -> Vector4<f64> {
        match self.kind {
            GridKind::Sphere3 => {
                let q = Quaternion::from_vector(x);
                (q * Quaternion::exp_unit(Quaternion::UNITS[a], t)).to_vector()
            }
            GridKind::Torus3 => {
                let mut y = *x;
                y[a] = (y[a] + t).rem_euclid(self.extent);
                y
            }
            _ => {
                let mut y = *x;
                y[a] += t;
                y
            }
        }
    }

    /// Intrinsic distance: Euclidean, periodic, or great-circle.
    pub fn distance(&self, x: &Vector4<f64>, y: &Vector4<f64>) -> f64 {
        match self.kind {
            GridKind::Sphere3 => 2.0 * (0.5 * (x - y).norm()).min(1.0).asin(),
            GridKind::Torus3 => self.displacement(x, y).norm(),
            _ => (x - y).norm(),
        }
    }

    /// `y − x` for flat domains, reduced to the minimal image on the torus.
    pub fn displacement(&self, x: &Vector4<f64>, y: &Vector4<f64>) -> Vector4<f64> {
        let mut d = y - x;
        if self.kind == GridKind::Torus3 {
            for k in 0..3 {
                d[k] -= self.extent * (d[k] / self.extent).round();
            }
        }
        d
    }

    /// Radius of the largest ball around `x` that stays inside the domain.
    pub fn max_radius(&self, x: &Vector4<f64>) -> f64 {
        match self.kind {
            GridKind::Ball3 => self.extent - x.norm(),
            GridKind::Torus3 => 0.5 * self.extent,
            GridKind::Sphere3 => PI,
            GridKind::Flat4 => self.extent - x.iter().fold(0.0_f64, |m, c| m.max(c.abs())),
        }
    }

    pub fn check_ball(&self, x: &Vector4<f64>, r: f64) -> Result<()> {
        let max = self.max_radius(x);
        if r > max + 1e-12 {
            return Err(Error::BallOutsideDomain { radius: r, max_radius: max.max(0.0) });
        }
        Ok(())
    }

    pub fn index(&self) -> &SpatialIndex {
        self.index.get_or_init(|| SpatialIndex::new(self, self.index_cell()))
    }

    fn index_cell(&self) -> f64 {
        match self.kind {
            GridKind::Sphere3 => 0.05,
            _ => (4.0 * self.h).min(self.extent),
        }
    }

    /// Indices of points with intrinsic distance `< r` from `x`.
    pub fn ball_indices(&self, x: &Vector4<f64>, r: f64) -> Vec<usize> {
        let chord = if self.kind == GridKind::Sphere3 { 2.0 * (0.5 * r.min(PI)).sin() } else { r };
        self.index()
            .candidates(x, chord)
            .into_iter()
            .filter(|&i| self.distance(x, &self.points[i]) < r)
            .collect()
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest(&self, x: &Vector4<f64>) -> usize {
        let mut r = self.h;
        loop {
            let chord = if self.kind == GridKind::Sphere3 { 2.0 * (0.5 * r.min(PI)).sin() } else { r };
            let cand = self.index().candidates(x, chord);
            let best = cand
                .into_iter()
                .map(|i| (self.distance(x, &self.points[i]), i))
                .min_by(|a, b| a.partial_cmp(b).unwrap());
            if let Some((_, i)) = best {
                return i;
            }
            r *= 2.0;
        }
    }

    /// CSV dump: `id,x0,x1,x2,x3,weight,` then the frame vectors component by component.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let m = self.frame_len();
        write!(out, "id,x0,x1,x2,x3,weight")?;
        for a in 0..m {
            for c in 0..4 {
                write!(out, ",v{}_{}", a + 1, c)?;
            }
        }
        writeln!(out)?;
        for (i, (p, w)) in self.points.iter().zip(&self.weights).enumerate() {
            write!(out, "{i},{},{},{},{},{}", p[0], p[1], p[2], p[3], w)?;
            for v in self.frame_at(p) {
                for c in 0..4 {
                    write!(out, ",{}", v[c])?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volume() {
        let g = build_grid(GridKind::Ball3, 1.0 / 16.0, 1.0).unwrap();
        let v = 4.0 * PI / 3.0;
        assert!((g.total_weight() - v).abs() < 0.02 * v);
    }

    #[test]
    fn sphere_volume() {
        let g = build_grid(GridKind::Sphere3, 0.3, SPHERE3_DEFAULT_EXTENT).unwrap();
        let v = 2.0 * PI * PI;
        assert!((g.total_weight() - v).abs() < 0.02 * v, "{}", g.total_weight());
        for p in g.points.iter().step_by(97) {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn torus_volume_exact() {
        let g = build_grid(GridKind::Torus3, 0.1, 1.0).unwrap();
        assert!((g.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat4_volume() {
        let g = build_grid(GridKind::Flat4, 0.25, 1.0).unwrap();
        assert_eq!(g.len(), 9usize.pow(4));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_grid(GridKind::Ball3, 0.0, 1.0).is_err());
        assert!(build_grid(GridKind::Ball3, 0.5, 1.0).is_err());
        assert!(GridKind::parse("cylinder").is_err());
    }

    #[test]
    fn sphere_frame_is_orthonormal_and_left_invariant() {
        let g = build_grid(GridKind::Sphere3, 0.5, 6.0).unwrap();
        for p in &g.points {
            let f = g.frame_at(p);
            for a in 0..3 {
                assert!((f[a].dot(p)).abs() < 1e-10);
                for b in 0..3 {
                    let e = if a == b { 1.0 } else { 0.0 };
                    assert!((f[a].dot(&f[b]) - e).abs() < 1e-10);
                }
            }
        }
        let id = Vector4::new(1.0, 0.0, 0.0, 0.0);
        let f = g.frame_at(&id);
        assert_eq!(f[0], Vector4::new(0.0, 1.0, 0.0, 0.0));
        assert_eq!(f[1], Vector4::new(0.0, 0.0, 1.0, 0.0));
        assert_eq!(f[2], Vector4::new(0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn flow_derivative_is_frame() {
        let g = build_grid(GridKind::Sphere3, 0.5, 6.0).unwrap();
        let p = g.points[123];
        let f = g.frame_at(&p);
        for a in 0..3 {
            let d = (g.flow(&p, a, 1e-6) - g.flow(&p, a, -1e-6)) / 2e-6;
            assert!((d - f[a]).norm() < 1e-8);
        }
    }

    #[test]
    fn ball_query_matches_brute_force() {
        let g = build_grid(GridKind::Sphere3, 0.4, 6.0).unwrap();
        let x = g.points[500];
        for r in [0.1, 0.5, 1.3] {
            let mut a = g.ball_indices(&x, r);
            a.sort();
            let b: Vec<usize> = (0..g.len()).filter(|&i| g.distance(&x, &g.points[i]) < r).collect();
            assert_eq!(a, b);
        }
        let t = build_grid(GridKind::Torus3, 0.1, 1.0).unwrap();
        let x = Vector4::new(0.02, 0.5, 0.97, 0.0);
        let mut a = t.ball_indices(&x, 0.25);
        a.sort();
        let b: Vec<usize> = (0..t.len()).filter(|&i| t.distance(&x, &t.points[i]) < 0.25).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = build_grid(GridKind::Torus3, 0.25, 1.0).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), g.len() + 1);
        assert!(s.starts_with("id,x0,x1,x2,x3,weight,v1_0"));
    }
}
