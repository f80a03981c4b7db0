use nalgebra::Vector4;
use serde::Serialize;

use super::function::GridFunction;
use crate::error::{input, Result};

/// Exponents and constant of the differential inequality `Δf ≤ c(f^q + f^p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeinzParams {
    pub d: f64,
    pub q: f64,
    pub p: u8,
    pub delta: u8,
    pub c: f64,
}

impl HeinzParams {
    pub fn new(d: f64, p: u8, delta: u8, c: f64) -> Result<Self> {
        if !(d > 0.0) {
            return input(format!("d must be positive, got {d}"));
        }
        if p > 1 || delta > 1 {
            return input("p and δ must be 0 or 1");
        }
        if !(c > 0.0) {
            return input(format!("c must be positive, got {c}"));
        }
        Ok(Self { d, q: 2.0 / d + 1.0, p, delta, c })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "t", rename_all = "snake_case")]
pub enum HeinzRoot {
    Root(f64),
    NoSmallRoot,
}

/// Smallest nonnegative root of `t^d(1 − ct²) = cε`.
///
/// `g(t) = t^d(1 − ct²)` increases up to `t* = (d/((d+2)c))^{1/2}`; the bracket is
/// `[0, min(t*, (2c)^{−1/2})]`, which is the full `[0, (2c)^{−1/2}]` for `d ≥ 2`.
pub fn heinz_root_solve(d: f64, c: f64, eps: f64) -> Result<HeinzRoot> {
    if !(d > 0.0 && c > 0.0) {
        return input("d and c must be positive");
    }
    if !(eps >= 0.0) {
        return input(format!("ε must be nonnegative, got {eps}"));
    }
    if eps == 0.0 {
        return Ok(HeinzRoot::Root(0.0));
    }
    let g = |t: f64| t.powf(d) * (1.0 - c * t * t);
    let target = c * eps;
    let hi0 = (1.0 / (2.0 * c)).sqrt().min((d / ((d + 2.0) * c)).sqrt());
    if g(hi0) < target {
        return Ok(HeinzRoot::NoSmallRoot);
    }
    let (mut lo, mut hi) = (0.0, hi0);
    while hi - lo > 1e-15 * hi0.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(HeinzRoot::Root(0.5 * (lo + hi)))
}

/// Constants used by [`heinz_verify`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HeinzConfig {
    /// Smallness threshold on `ε = r^{d−n}∫_{B_r} f`.
    pub epsilon0: f64,
    /// Constant of the monotonicity hypothesis.
    pub monotonicity_constant: f64,
    /// Constant asserted in the sup bound.
    pub sup_constant: f64,
}

impl Default for HeinzConfig {
    fn default() -> Self {
        Self { epsilon0: 6.0, monotonicity_constant: 4.0, sup_constant: 4.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HeinzStatus {
    Holds,
    BoundViolated,
    HypothesesViolated,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeinzReport {
    pub status: HeinzStatus,
    /// Smallest `c` making `−Δf ≤ c(f^q + f^p)` hold on `B_r(x)`.
    pub c_needed: f64,
    pub differential_inequality_holds: bool,
    /// Largest `s^{d−n}∫_{B_s(y)} f / r^{d−n}∫_{B_r(x)} f` over the tested `(y, s)`.
    pub monotonicity_ratio: f64,
    pub monotonicity_holds: bool,
    pub epsilon: f64,
    pub sup: f64,
    /// `r^{−d}ε + ((1 − p) + δ)r²`.
    pub bound: f64,
    /// `sup / bound`.
    pub fitted_constant: f64,
}

/// Tests both hypotheses of the Heinz lemma on `B_r(x)`, then the sup bound on `B_{r/4}(x)`.
///
/// The Laplacian is the positive one, `Δ = −Σ v_a²`, so the first hypothesis reads
/// `−Σ v_a² f ≤ c(f^q + f^p)`. The monotonicity hypothesis is tested with `B_s(y)` on the left for
/// `y` on the grid in `B_{r/2}(x)` and `s ∈ {r/2, r/4, r/8}` down to twice the grid spacing.
pub fn heinz_verify(f: &GridFunction, params: &HeinzParams, x: &Vector4<f64>, r: f64, config: &HeinzConfig) -> Result<HeinzReport> {
    f.grid.check_ball(x, r)?;
    let n = f.dimension();
    let h = f.grid.h;
    let mut c_needed: f64 = 0.0;
    for i in f.ball(x, r) {
        let v = f.values[i].max(0.0);
        let lap = -f.laplacian(&f.grid.points[i], h)?;
        let rhs = v.powf(params.q) + if params.p == 0 { 1.0 } else { v };
        if lap > 0.0 {
            c_needed = c_needed.max(if rhs > 0.0 { lap / rhs } else { f64::INFINITY });
        }
    }
    let diff_ok = c_needed <= params.c;

    let whole = f.ball_integral(x, r);
    let epsilon = r.powf(params.d - n) * whole;
    let mut ratio: f64 = 0.0;
    if whole > 0.0 {
        let centres = f.ball(x, 0.5 * r);
        let stride = (centres.len() / 64).max(1);
        let mut s = 0.5 * r;
        while s >= 2.0 * h {
            for &i in centres.iter().step_by(stride) {
                let y = f.grid.points[i];
                if f.grid.check_ball(&y, s).is_err() {
                    continue;
                }
                ratio = ratio.max(s.powf(params.d - n) * f.ball_integral(&y, s) / epsilon);
            }
            s *= 0.5;
        }
    }
    let mono_ok = ratio <= config.monotonicity_constant;

    let sup = f.ball(x, 0.25 * r).into_iter().map(|i| f.values[i]).fold(0.0, f64::max);
    let extra = (1 - params.p) as f64 + params.delta as f64;
    let bound = r.powf(-params.d) * epsilon + extra * r * r;
    let fitted_constant = if bound > 0.0 {
        sup / bound
    } else if sup == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let status = if !(diff_ok && mono_ok) {
        HeinzStatus::HypothesesViolated
    } else if epsilon > config.epsilon0 {
        HeinzStatus::NotApplicable
    } else if sup <= config.sup_constant * bound {
        HeinzStatus::Holds
    } else {
        HeinzStatus::BoundViolated
    };
    Ok(HeinzReport {
        status,
        c_needed,
        differential_inequality_holds: diff_ok,
        monotonicity_ratio: ratio,
        monotonicity_holds: mono_ok,
        epsilon,
        sup,
        bound,
        fitted_constant,
    })
}

/// A Gaussian spike `M exp(−|y − x₀|²/w²)` sampled on `grid`.
pub fn gaussian_spike(grid: std::sync::Arc<crate::domains::DomainGrid>, x0: Vector4<f64>, height: f64, width: f64) -> GridFunction {
    GridFunction::new(grid, move |y| height * (-(y - x0).norm_squared() / (width * width)).exp())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domains::{build_grid, GridKind};

    fn root(d: f64, c: f64, e: f64) -> f64 {
        match heinz_root_solve(d, c, e).unwrap() {
            HeinzRoot::Root(t) => t,
            HeinzRoot::NoSmallRoot => panic!("no root"),
        }
    }

    #[test]
    fn quadratic_closed_form() {
        let e: f64 = 0.01;
        let want = ((1.0 - (1.0 - 4.0 * e).sqrt()) / 2.0).sqrt();
        assert!((root(2.0, 1.0, e) - want).abs() < 1e-12);
        assert_eq!(root(2.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn small_eps_asymptotics() {
        for d in [1.0, 2.0, 3.0] {
            let t = root(d, 1.0, 1e-6);
            let a = 1e-6_f64.powf(1.0 / d);
            assert!((t - a).abs() < 0.1 * a, "d = {d}: {t} vs {a}");
        }
    }

    #[test]
    fn no_root_for_large_eps() {
        assert_eq!(heinz_root_solve(2.0, 1.0, 0.3).unwrap(), HeinzRoot::NoSmallRoot);
        assert!(heinz_root_solve(2.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn monotone_in_eps_and_c() {
        let mut prev = 0.0;
        for k in 1..20 {
            let t = root(2.0, 1.0, k as f64 * 0.01);
            assert!(t > prev);
            prev = t;
        }
        let mut prev = 0.0;
        for k in 1..10 {
            let t = root(1.0, 0.1 * k as f64, 0.01);
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn q_is_tied_to_d() {
        assert_eq!(HeinzParams::new(2.0, 1, 0, 1.0).unwrap().q, 2.0);
        assert!(HeinzParams::new(1.0, 2, 0, 1.0).is_err());
    }

    #[test]
    fn zero_function_holds() {
        let g = Arc::new(build_grid(GridKind::Ball3, 0.1, 1.0).unwrap());
        let f = GridFunction::new(g, |_| 0.0);
        let p = HeinzParams::new(1.0, 1, 0, 1.0).unwrap();
        let r = heinz_verify(&f, &p, &Vector4::zeros(), 0.8, &HeinzConfig::default()).unwrap();
        assert_eq!(r.status, HeinzStatus::Holds);
    }

    #[test]
    fn spike_is_reported_not_asserted() {
        let g = Arc::new(build_grid(GridKind::Ball3, 1.0 / 32.0, 1.0).unwrap());
        let f = gaussian_spike(g, Vector4::zeros(), 50.0, 0.02);
        let p = HeinzParams::new(1.0, 0, 0, 1.0).unwrap();
        let r = heinz_verify(&f, &p, &Vector4::zeros(), 0.9, &HeinzConfig::default()).unwrap();
        assert_eq!(r.status, HeinzStatus::HypothesesViolated);
        assert!(!r.differential_inequality_holds);
        assert!(r.sup > HeinzConfig::default().sup_constant * r.bound);
    }
}
