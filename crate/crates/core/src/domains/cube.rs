use nalgebra::Vector3;

use crate::error::{input, Result};

/// `Q_{r,s}(z₀, w₀)`: points `z + w` with `|z − z₀| < r` along the line direction and
/// `|w − w₀| < s` in the normal plane.
#[derive(Clone, Copy, Debug)]
pub struct GeneralizedCube {
    pub z0: Vector3<f64>,
    pub w0: Vector3<f64>,
    pub direction: Vector3<f64>,
    pub r: f64,
    pub s: f64,
}

impl GeneralizedCube {
    pub fn new(z0: Vector3<f64>, w0: Vector3<f64>, direction: Vector3<f64>, r: f64, s: f64) -> Result<Self> {
        if !(r > 0.0 && s > 0.0) {
            return input(format!("generalized cube needs r, s > 0, got r = {r}, s = {s}"));
        }
        let n = direction.norm();
        if n == 0.0 {
            return input("generalized cube needs a nonzero direction");
        }
        let v = direction / n;
        // z₀ is taken along the line and w₀ normal to it
        let z0 = v * v.dot(&z0);
        let w0 = w0 - v * v.dot(&w0);
        Ok(Self { z0, w0, direction: v, r, s })
    }

    pub fn center(&self) -> Vector3<f64> {
        self.z0 + self.w0
    }

    pub fn contains(&self, x: &Vector3<f64>) -> bool {
        let d = x - self.center();
        let t = d.dot(&self.direction);
        let w = d - self.direction * t;
        t.abs() < self.r && w.norm() < self.s
    }

    pub fn volume(&self) -> f64 {
        2.0 * self.r * std::f64::consts::PI * self.s * self.s
    }

    /// Radius of the smallest ball around the center containing the cube.
    pub fn circumradius(&self) -> f64 {
        (self.r * self.r + self.s * self.s).sqrt()
    }
}
