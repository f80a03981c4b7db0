use nalgebra::Vector4;
use serde::Serialize;

use super::radon::RadonMeasureApprox;
use crate::error::{input, Result};

#[derive(Clone, Debug, Serialize)]
pub struct ThetaEstimate {
    /// Intercept of the linear fit of `μ(B_r)/r` in `r`.
    pub limit: f64,
    pub slope: f64,
    /// `(r, μ(B_r)/r)` pairs.
    pub samples: Vec<(f64, f64)>,
}

/// `Θ(x) = lim_{r↓0} μ(B_r(x))/r`, extrapolated linearly in `r`.
pub fn density_theta(mu: &RadonMeasureApprox, x: &Vector4<f64>, radii: &[f64]) -> Result<ThetaEstimate> {
    if radii.len() < 3 {
        return input(format!("density extrapolation needs at least 3 radii, got {}", radii.len()));
    }
    if radii.iter().any(|&r| !(r > 0.0)) {
        return input("radii must be positive");
    }
    let samples: Vec<(f64, f64)> = radii.iter().map(|&r| (r, mu.ball_mass(x, r) / r)).collect();
    let n = samples.len() as f64;
    let mr = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mq = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mr).powi(2)).sum();
    if sxx == 0.0 {
        return input("radii must not all coincide");
    }
    let sxy: f64 = samples.iter().map(|s| (s.0 - mr) * (s.1 - mq)).sum();
    let slope = sxy / sxx;
    Ok(ThetaEstimate { limit: mq - slope * mr, slope, samples })
}
