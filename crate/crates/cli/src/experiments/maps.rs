//! Flat-target test maps shared by the experiments and the calibration.

use std::sync::Arc;

use fueter_core::fueter::{AffineMap, FnMap, SectionMap};
use fueter_core::hk::SphereMap;
use nalgebra::{Vector3, Vector4};

/// `(e^{x₃}cos x₂, e^{x₃}sin x₂, c·x₁, 0)`; Fueter for `c = 0`.
pub fn exp_map(c: f64) -> FnMap {
    FnMap::new(4, move |x: &Vector4<f64>| {
        let m = x[2].exp();
        vec![m * x[1].cos(), m * x[1].sin(), c * x[0], 0.0]
    })
    .with_derivative(move |x, t| {
        let m = x[2].exp();
        let (s, co) = x[1].sin_cos();
        vec![m * (co * t[2] - s * t[1]), m * (s * t[2] + co * t[1]), c * t[0], 0.0]
    })
}

/// `(x₁ + e^{x₃}cos x₂, e^{x₃}sin x₂, −x₂, 0)`.
pub fn shifted_exp_map() -> FnMap {
    FnMap::new(4, |x: &Vector4<f64>| {
        let m = x[2].exp();
        vec![x[0] + m * x[1].cos(), m * x[1].sin(), -x[1], 0.0]
    })
    .with_derivative(|x, t| {
        let m = x[2].exp();
        let (s, co) = x[1].sin_cos();
        vec![t[0] + m * (co * t[2] - s * t[1]), m * (s * t[2] + co * t[1]), -t[1], 0.0]
    })
}

/// `(x₁x₂, x₃², sin(x₁ + x₃), x₂³)`, with no derivative closure.
pub fn polynomial_map() -> FnMap {
    FnMap::new(4, |x: &Vector4<f64>| vec![x[0] * x[1], x[2] * x[2], (x[0] + x[2]).sin(), x[1].powi(3)])
}

pub fn scaled_affine(m: AffineMap, a: f64) -> AffineMap {
    AffineMap::new(m.offset * a, m.matrix * a)
}

/// The three flat-target families: linear Fueter, `exp_map(0.3)` and the shifted exponential.
pub fn flat_family(k: usize, amplitude: f64) -> Arc<dyn SectionMap> {
    match k {
        0 => Arc::new(scaled_affine(AffineMap::linear_fueter(), amplitude)),
        1 => {
            let inner = exp_map(0.3);
            Arc::new(FnMap::new(4, move |x: &Vector4<f64>| (inner.f)(x).into_iter().map(|v| amplitude * v).collect()))
        }
        _ => {
            let inner = shifted_exp_map();
            Arc::new(FnMap::new(4, move |x: &Vector4<f64>| (inner.f)(x).into_iter().map(|v| amplitude * v).collect()))
        }
    }
}

/// `p ↦ (0, p₁, p₂p₃, p₃)`; its radial extension is a degree-0 homogeneous map.
pub struct ConeProfile;

impl SphereMap for ConeProfile {
    fn target_dim(&self) -> usize {
        4
    }
    fn eval(&self, p: &Vector3<f64>) -> Vec<f64> {
        vec![0.0, p.x, p.y * p.z, p.z]
    }
}
