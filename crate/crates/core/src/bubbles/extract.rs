use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DVector, Matrix3, SymmetricEigen, Vector3, Vector4};
use rayon::prelude::*;
use serde::Serialize;

use super::rescale::{exp_at, log_at, PullbackMap};
use crate::domains::{build_grid, GridKind};
use crate::error::{input, Error, Result};
use crate::fueter::{DerivativeMode, SectionMap, SectionSample};
use crate::hk::{RiemannPoint, SphereGrid, TargetChart};
use crate::measures::{density_theta, RadonMeasureApprox};

/// Tuning of the extraction pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct BubbleParams {
    /// Largest and smallest preliminary scale `ε`.
    pub epsilon_max: f64,
    pub epsilon_min: f64,
    /// Radius of the concentration cylinder around `v`, in units of `ε`.
    pub cylinder_radius: f64,
    /// Share of `μ(B_ε)` required inside the cylinder.
    pub concentration: f64,
    /// Number of log-spaced `δ` values, from 1 down by factors of `2^{1/4}`.
    pub scale_count: usize,
    /// Spacing of the unit-ball quadrature used for `G(δ)`.
    pub ball_spacing: f64,
    /// Log-polar quadrature: radial nodes, angular nodes, log-radius span.
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub log_span: f64,
    /// Samples of the averaging segment `t ∈ [−½, ½]` along `v`.
    pub axial_nodes: usize,
    /// Energy share inside half the disk needed to declare a sphere map.
    pub capture: f64,
    /// Radii for the density `Θ` at the recentred point, in multiples of the grid spacing.
    pub theta_radii: Vec<f64>,
}

impl Default for BubbleParams {
    fn default() -> Self {
        Self {
            epsilon_max: 0.5,
            epsilon_min: 0.05,
            cylinder_radius: 0.25,
            concentration: 0.9,
            scale_count: 64,
            ball_spacing: 1.0 / 6.0,
            radial_nodes: 384,
            angular_nodes: 64,
            log_span: 16.0,
            axial_nodes: 5,
            capture: 0.95,
            theta_radii: vec![3.0, 2.0, 1.0],
        }
    }
}

/// Scales chosen for one sample of the sequence.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleChoice {
    pub sample: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Normal recentring offset, in units of `ε`, on the basis `(n₂, n₃)`.
    pub offset: [f64; 2],
    /// `G(δ)` at the chosen scale.
    pub level: f64,
}

/// The extracted bubble on an `S²` grid, in target chart coordinates.
#[derive(Clone, Debug, Default)]
pub struct BubbleMap {
    pub points: Vec<Vector3<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl BubbleMap {
    /// `id,p1,p2,p3,c0,c1,…`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let dim = self.values.first().map_or(0, |v| v.len());
        write!(out, "id,p1,p2,p3")?;
        for c in 0..dim {
            write!(out, ",c{c}")?;
        }
        writeln!(out)?;
        for (i, (p, v)) in self.points.iter().zip(&self.values).enumerate() {
            write!(out, "{i},{:.12e},{:.12e},{:.12e}", p.x, p.y, p.z)?;
            for c in v {
                write!(out, ",{c:.12e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BubbleReport {
    pub base_point: [f64; 4],
    pub recentered_point: [f64; 4],
    pub tangent_direction: [f64; 3],
    pub normal_basis: [[f64; 3]; 2],
    pub bubble_energy: f64,
    /// `(∫|∂̄𝔷|²)^{1/2}` with `∂̄ = ∂_{n₂} − I(v)∂_{n₃}`.
    pub antiholomorphy_residual: f64,
    /// `antiholomorphy_residual / bubble_energy^{1/2}`.
    pub relative_residual: f64,
    pub theta_at_x: f64,
    /// Energy share inside half the extraction disk.
    pub capture_fraction: f64,
    pub sphere_map: bool,
    pub scales: Vec<ScaleChoice>,
    #[serde(skip)]
    pub bubble: BubbleMap,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum BubbleOutcome {
    Bubble(Box<BubbleReport>),
    NoBubble { reason: String },
}

impl BubbleOutcome {
    pub fn bubble(&self) -> Option<&BubbleReport> {
        match self {
            BubbleOutcome::Bubble(b) => Some(b),
            BubbleOutcome::NoBubble { .. } => None,
        }
    }
}

/// Right-handed `(n₂, n₃)` completing the unit vector `v`.
pub fn normal_basis(v: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let seed = if v.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let n2 = (seed - v * v.dot(&seed)).normalize();
    let n3 = v.cross(&n2);
    (n2, n3)
}

/// Principal axis of the second moment of `nu` in the ball of radius `radius` around `x`,
/// in frame components at `x`, with its first significant component made positive.
pub fn estimate_tangent_direction(nu: &RadonMeasureApprox, x: &Vector4<f64>, radius: f64) -> Result<Vector3<f64>> {
    let grid = nu.grid().ok_or_else(|| Error::Input("tangent estimate needs a grid-backed measure".into()))?;
    let frame = grid.frame_at(x);
    let mut m = Matrix3::zeros();
    let mut total = 0.0;
    for i in grid.ball_indices(x, radius) {
        let mass = nu.mass(i);
        if mass <= 0.0 {
            continue;
        }
        let w = log_at(grid, x, &frame, &grid.points[i]);
        let w = Vector3::new(w[0], w[1], w[2]);
        m += w * w.transpose() * mass;
        total += mass;
    }
    if total <= 0.0 {
        return input("no defect mass near the point");
    }
    let eig = SymmetricEigen::new(m);
    let k = eig.eigenvalues.imax();
    let mut v: Vector3<f64> = eig.eigenvectors.column(k).into();
    let lead = (0..3).find(|&a| v[a].abs() > 1e-6).unwrap_or(0);
    if v[lead] < 0.0 {
        v = -v;
    }
    Ok(v.normalize())
}

/// Value and derivatives along `dirs` of a pulled-back map.
fn jet(map: &PullbackMap, target: &dyn TargetChart, exact: bool, y: &Vector4<f64>, dirs: &[Vector4<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let val = map.eval(y)?;
    let du = dirs
        .iter()
        .map(|d| {
            if exact {
                map.derivative(y, d).ok_or_else(|| Error::Input("map has no closed-form derivative".into()))
            } else {
                let s = 1e-4;
                let a = map.eval(&(y + d * s))?;
                let b = map.eval(&(y - d * s))?;
                Ok(target.displacement(&b, &a).into_iter().map(|c| c / (2.0 * s)).collect())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((val, du))
}

fn norm2(g: &nalgebra::DMatrix<f64>, d: &[f64]) -> f64 {
    let v = DVector::from_column_slice(d);
    (v.transpose() * g * &v)[(0, 0)]
}

fn lift(v: &Vector3<f64>) -> Vector4<f64> {
    Vector4::new(v.x, v.y, v.z, 0.0)
}

struct Zoom<'a> {
    map: PullbackMap,
    target: &'a dyn TargetChart,
    exact: bool,
    n2: Vector3<f64>,
    n3: Vector3<f64>,
    ball: Vec<(Vector4<f64>, f64)>,
}

impl Zoom<'_> {
    fn at(&self, w: [f64; 2]) -> Vector4<f64> {
        lift(&(self.n2 * w[0] + self.n3 * w[1]))
    }

    fn density(&self, y: &Vector4<f64>) -> Result<f64> {
        let dirs = [Vector4::x(), Vector4::y(), Vector4::z()];
        let (val, du) = jet(&self.map, self.target, self.exact, y, &dirs)?;
        let g = match self.target.metric_at(&val) {
            Err(Error::Domain(_)) => return Ok(0.0),
            other => other?,
        };
        Ok(du.iter().map(|d| norm2(&g, d)).sum())
    }

    /// `(1/δ)∫_{B_δ(w)} |∇ũ|²`.
    fn ball_energy(&self, w: [f64; 2], delta: f64) -> Result<f64> {
        let c = self.at(w);
        let mut s = 0.0;
        for (y, q) in &self.ball {
            s += q * self.density(&(c + y * delta))?;
        }
        Ok(s * delta * delta)
    }

    /// Pattern search of `f` over the normal disk `|w| ≤ 1` from `start`.
    fn climb(&self, start: [f64; 2], step: f64, min_step: f64, f: impl Fn([f64; 2]) -> Result<f64>) -> Result<([f64; 2], f64)> {
        let mut w = start;
        let mut best = f(w)?;
        let mut h = step;
        while h > min_step {
            let mut moved = false;
            for d in [[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]] {
                let c = [w[0] + d[0], w[1] + d[1]];
                if c[0] * c[0] + c[1] * c[1] > 1.0 {
                    continue;
                }
                let v = f(c)?;
                if v > best {
                    best = v;
                    w = c;
                    moved = true;
                }
            }
            if !moved {
                h *= 0.5;
            }
        }
        Ok((w, best))
    }
}

fn unit_ball(spacing: f64) -> Result<Vec<(Vector4<f64>, f64)>> {
    let g = build_grid(GridKind::Ball3, spacing, 1.0)?;
    Ok(g.points.iter().cloned().zip(g.weights.iter().cloned()).collect())
}

/// Step 1: the largest `ε` with `μ(B_ε)/ε ≥ ε₀` and the mass of `B_ε` concentrated in the
/// cylinder of radius `cylinder_radius·ε` around the `v`-geodesic.
fn preliminary_scale(u: &SectionSample, mu: &RadonMeasureApprox, x: &Vector4<f64>, v: &Vector3<f64>, eps0: f64, p: &BubbleParams) -> Option<f64> {
    let grid = &u.grid;
    let frame = grid.frame_at(x);
    let mut eps = p.epsilon_max.min(u.grid.max_radius(x));
    while eps >= p.epsilon_min {
        if mu.ball_mass(x, eps) / eps >= eps0 {
            let mut inside = 0.0;
            let mut total = 0.0;
            for i in grid.ball_indices(x, eps) {
                let m = mu.mass(i);
                let w = log_at(grid, x, &frame, &grid.points[i]);
                let w = Vector3::new(w[0], w[1], w[2]);
                total += m;
                if (w - v * v.dot(&w)).norm() <= p.cylinder_radius * eps {
                    inside += m;
                }
            }
            if total > 0.0 && inside >= p.concentration * total {
                return Some(eps);
            }
        }
        eps *= 0.5_f64.powf(0.25);
    }
    None
}

/// Normal coordinates, in units of `ε`, of the densest grid point in `B_ε(x)`.
fn density_peak(u: &SectionSample, x: &Vector4<f64>, n2: &Vector3<f64>, n3: &Vector3<f64>, eps: f64) -> [f64; 2] {
    let frame = u.grid.frame_at(x);
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
    let mut idx = u.grid.ball_indices(x, eps);
    idx.sort_unstable();
    for i in idx {
        let w = log_at(&u.grid, x, &frame, &u.grid.points[i]);
        let w = Vector3::new(w[0], w[1], w[2]) / eps;
        let c = [w.dot(n2), w.dot(n3)];
        if u.energy_density[i] > best.0 && c[0] * c[0] + c[1] * c[1] <= 1.0 {
            best = (u.energy_density[i], c);
        }
    }
    best.1
}

/// Step 3: the scale where `G(δ) = max_w (1/δ)∫_{B_δ(w)}|∇ũ_ε|²` first reaches `ε₀/8`, scanning
/// from the finest scale up, refined by bisection in `log δ`.
fn bubble_scale(zoom: &Zoom, start: [f64; 2], eps0: f64, p: &BubbleParams) -> Result<Option<(f64, [f64; 2], f64)>> {
    let target = eps0 / 8.0;
    // refine the sampled density peak on the normal disk
    let (w_peak, _) = zoom.climb(start, 0.01, 1e-9, |w| zoom.density(&zoom.at(w)))?;
    let g = |delta: f64| zoom.climb(w_peak, 0.5 * delta, delta / 64.0, |w| zoom.ball_energy(w, delta));
    let deltas: Vec<f64> = (0..p.scale_count).rev().map(|k| 0.5_f64.powf(k as f64 / 4.0)).collect();
    let mut below = None;
    for &d in &deltas {
        let (w, level) = g(d)?;
        if level >= target {
            let Some(lo) = below else {
                return Ok(None);
            };
            let (mut lo, mut hi): (f64, f64) = (lo, d);
            let mut best = (d, w, level);
            for _ in 0..30 {
                let mid = (lo * hi).sqrt();
                let (wm, lm) = g(mid)?;
                if lm >= target {
                    hi = mid;
                    best = (mid, wm, lm);
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(best));
        }
        below = Some(d);
    }
    Ok(None)
}

/// Runs the three-step extraction at `x` with tangent direction `v` (frame components).
pub fn extract_bubble(seq: &[SectionSample], x: &Vector4<f64>, v: &Vector3<f64>, epsilon0: f64) -> Result<BubbleOutcome> {
    extract_bubble_with(seq, x, v, epsilon0, &BubbleParams::default(), None)
}

/// [`extract_bubble`] with explicit parameters; `theta_measure` defaults to the energy measure of
/// the last sample.
pub fn extract_bubble_with(
    seq: &[SectionSample],
    x: &Vector4<f64>,
    v: &Vector3<f64>,
    epsilon0: f64,
    params: &BubbleParams,
    theta_measure: Option<&RadonMeasureApprox>,
) -> Result<BubbleOutcome> {
    if seq.is_empty() {
        return input("empty sequence");
    }
    if !(epsilon0 > 0.0) {
        return input("ε₀ must be positive");
    }
    let vn = v.norm();
    if (vn - 1.0).abs() > 1e-6 {
        return input(format!("tangent direction must be a unit vector, |v| = {vn}"));
    }
    let v = v / vn;
    let (n2, n3) = normal_basis(&v);
    let tail = seq.len() / 2;
    let ball = unit_ball(params.ball_spacing)?;
    let choices: Vec<Result<Option<(ScaleChoice, PullbackMap)>>> = (tail..seq.len())
        .into_par_iter()
        .map(|i| {
            let u = &seq[i];
            let mu = RadonMeasureApprox::from_sample(u, "energy");
            let Some(eps) = preliminary_scale(u, &mu, x, &v, epsilon0, params) else {
                return Ok(None);
            };
            let start = density_peak(u, x, &n2, &n3, eps);
            let zoom = Zoom {
                map: PullbackMap::new(u, x, &[0.0; 3], eps)?,
                target: u.target.as_ref(),
                exact: u.mode == DerivativeMode::Exact,
                n2,
                n3,
                ball: ball.clone(),
            };
            let Some((delta, w, level)) = bubble_scale(&zoom, start, epsilon0, params)? else {
                return Ok(None);
            };
            let off = (n2 * w[0] + n3 * w[1]) * eps;
            let map = PullbackMap::new(u, x, &[off.x, off.y, off.z], eps * delta)?;
            Ok(Some((ScaleChoice { sample: i, epsilon: eps, delta, offset: w, level }, map)))
        })
        .collect();
    // early members of the sequence may not concentrate yet; the bubble needs the last one
    let mut scales = Vec::new();
    let mut last = None;
    for c in choices {
        last = c?.map(|(s, m)| {
            scales.push(s);
            m
        });
    }
    let Some(map) = last else {
        return Ok(BubbleOutcome::NoBubble { reason: "no scale meets the concentration and ε₀/8 conditions".into() });
    };
    let u = seq.last().unwrap();
    let choice = scales.last().unwrap();
    let exact = u.mode == DerivativeMode::Exact;
    let target = u.target.as_ref();

    // log-polar quadrature of the v-averaged normal slices
    let s_max = (1.0 / choice.delta).ln();
    let ds = params.log_span / params.radial_nodes as f64;
    let dphi = 2.0 * PI / params.angular_nodes as f64;
    let nt = params.axial_nodes.max(1);
    let rows: Vec<Result<(f64, f64)>> = (0..params.radial_nodes)
        .into_par_iter()
        .map(|k| {
            let s = s_max - params.log_span + (k as f64 + 0.5) * ds;
            let rho = s.exp();
            let mut e = 0.0;
            let mut r = 0.0;
            for j in 0..params.angular_nodes {
                let phi = (j as f64 + 0.5) * dphi;
                let (sp, cp) = phi.sin_cos();
                let radial = n2 * cp + n3 * sp;
                let angular = (n3 * cp - n2 * sp) * rho;
                for m in 0..nt {
                    let t = if nt == 1 { 0.0 } else { -0.5 + m as f64 / (nt - 1) as f64 };
                    let y = lift(&(v * t + radial * rho));
                    let (val, du) = jet(&map, target, exact, &y, &[lift(&(radial * rho)), lift(&angular)])?;
                    // chart singularities (e.g. the poles of a bolt) carry no area
                    let h = match target.structure_at(&val) {
                        Err(Error::Domain(_)) => continue,
                        other => other?,
                    };
                    let i_v = h.complex_structure(&v)?;
                    let d_s = DVector::from_column_slice(&du[0]);
                    let d_phi = DVector::from_column_slice(&du[1]);
                    let dbar = &d_s - &i_v * &d_phi;
                    e += norm2(&h.metric, d_s.as_slice()) + norm2(&h.metric, d_phi.as_slice());
                    r += norm2(&h.metric, dbar.as_slice());
                }
            }
            let q = ds * dphi / nt as f64;
            Ok((e * q, r * q))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let energy: f64 = rows.iter().map(|r| r.0).sum();
    let dbar: f64 = rows.iter().map(|r| r.1).sum();
    let half = s_max - 2.0_f64.ln();
    let inner: f64 = rows
        .iter()
        .enumerate()
        .filter(|(k, _)| s_max - params.log_span + (*k as f64 + 0.5) * ds <= half)
        .map(|(_, r)| r.0)
        .sum();
    let capture = if energy > 0.0 { inner / energy } else { 0.0 };

    // Θ at the recentred point
    let frame = u.grid.frame_at(x);
    let off = (n2 * choice.offset[0] + n3 * choice.offset[1]) * choice.epsilon;
    let xc = exp_at(&u.grid, x, &frame, &[off.x, off.y, off.z]);
    let own;
    let mu = match theta_measure {
        Some(m) => m,
        None => {
            own = RadonMeasureApprox::from_sample(u, "energy");
            &own
        }
    };
    let radii: Vec<f64> = params.theta_radii.iter().map(|r| r * u.grid.h).collect();
    let theta = density_theta(mu, &xc, &radii)?.limit;

    let bubble = sample_bubble(&map, &n2, &n3, choice.delta, energy, &rows, params)?;
    let residual = dbar.sqrt();
    Ok(BubbleOutcome::Bubble(Box::new(BubbleReport {
        base_point: [x[0], x[1], x[2], x[3]],
        recentered_point: [xc[0], xc[1], xc[2], xc[3]],
        tangent_direction: [v.x, v.y, v.z],
        normal_basis: [[n2.x, n2.y, n2.z], [n3.x, n3.y, n3.z]],
        bubble_energy: energy,
        antiholomorphy_residual: residual,
        relative_residual: if energy > 0.0 { residual / energy.sqrt() } else { 0.0 },
        theta_at_x: theta,
        capture_fraction: capture,
        sphere_map: capture >= params.capture,
        scales,
        bubble,
    })))
}

/// The `t = 0` slice on an `S²` grid: `p ↦ 𝔷(ρ₅₀·w(p))` with `w` the stereographic coordinate and
/// `ρ₅₀` the median-energy radius; points beyond the disk take the boundary average.
#[allow(clippy::too_many_arguments)]
fn sample_bubble(
    map: &PullbackMap,
    n2: &Vector3<f64>,
    n3: &Vector3<f64>,
    delta: f64,
    energy: f64,
    rows: &[(f64, f64)],
    params: &BubbleParams,
) -> Result<BubbleMap> {
    let s_max = (1.0 / delta).ln();
    let ds = params.log_span / params.radial_nodes as f64;
    let mut acc = 0.0;
    let mut s50 = s_max;
    for (k, r) in rows.iter().enumerate() {
        acc += r.0;
        if acc >= 0.5 * energy {
            s50 = s_max - params.log_span + (k as f64 + 0.5) * ds;
            break;
        }
    }
    let rho50 = s50.exp();
    let rho_max = s_max.exp();
    let slice = |a: f64, b: f64| lift(&(n2 * a + n3 * b));
    let nb = 64;
    let mut boundary: Vec<f64> = vec![0.0; map.target_dim()];
    for j in 0..nb {
        let phi = 2.0 * PI * j as f64 / nb as f64;
        let val = map.eval(&slice(rho_max * phi.cos(), rho_max * phi.sin()))?;
        for (b, c) in boundary.iter_mut().zip(val) {
            *b += c / nb as f64;
        }
    }
    let grid = SphereGrid::new(16, 32);
    let mut values = Vec::with_capacity(grid.len());
    for p in &grid.points {
        let val = match RiemannPoint::from_sphere(p) {
            RiemannPoint::Finite(a, b) if (a * a + b * b).sqrt() * rho50 < rho_max => map.eval(&slice(rho50 * a, rho50 * b))?,
            _ => boundary.clone(),
        };
        values.push(val);
    }
    Ok(BubbleMap { points: grid.points, values })
}

/// Estimates `v` from `nu` at `x`, extracts, then re-estimates `v` at the recentred point and
/// extracts once more.
pub fn extract_at_locus_point(
    seq: &[SectionSample],
    nu: &RadonMeasureApprox,
    x: &Vector4<f64>,
    epsilon0: f64,
    tangent_radius: f64,
    params: &BubbleParams,
) -> Result<BubbleOutcome> {
    let v = match estimate_tangent_direction(nu, x, tangent_radius) {
        Ok(v) => v,
        Err(_) => return Ok(BubbleOutcome::NoBubble { reason: "no defect mass near the point".into() }),
    };
    let first = extract_bubble_with(seq, x, &v, epsilon0, params, Some(nu))?;
    let Some(b) = first.bubble() else {
        return Ok(first);
    };
    let xc = Vector4::from_column_slice(&b.recentered_point);
    let Ok(v2) = estimate_tangent_direction(nu, &xc, tangent_radius) else {
        return Ok(first);
    };
    let second = extract_bubble_with(seq, &xc, &v2, epsilon0, params, Some(nu))?;
    Ok(match second {
        BubbleOutcome::Bubble(mut b2) => {
            b2.base_point = [x[0], x[1], x[2], x[3]];
            BubbleOutcome::Bubble(b2)
        }
        BubbleOutcome::NoBubble { .. } => first,
    })
}
