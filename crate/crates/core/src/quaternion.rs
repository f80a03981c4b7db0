//! Hamilton quaternions with the convention `ij = k`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

/// `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    /// The imaginary units in the order `(i, j, k)`.
    pub const UNITS: [Self; 3] = [Self::I, Self::J, Self::K];

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn real(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    pub fn imaginary(v: &Vector3<f64>) -> Self {
        Self::new(0.0, v[0], v[1], v[2])
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.w, self.x, self.y, self.z)
    }

    pub fn imag(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn normalize(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    /// `exp(t u) = cos t + u sin t` for a unit imaginary `u`.
    pub fn exp_unit(u: Self, t: f64) -> Self {
        let (s, c) = t.sin_cos();
        Self::new(c, u.x * s, u.y * s, u.z * s)
    }

    /// Matrix of `q ↦ self · q` on the basis `(1, i, j, k)`.
    pub fn left_matrix(self) -> Matrix4<f64> {
        let Self { w, x, y, z } = self;
        Matrix4::new(
            w, -x, -y, -z, //
            x, w, -z, y, //
            y, z, w, -x, //
            z, -y, x, w,
        )
    }

    /// Matrix of `q ↦ q · self` on the basis `(1, i, j, k)`.
    pub fn right_matrix(self) -> Matrix4<f64> {
        let Self { w, x, y, z } = self;
        Matrix4::new(
            w, -x, -y, -z, //
            x, w, z, -y, //
            y, -z, w, x, //
            z, y, -x, w,
        )
    }
}

pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        quat_mul(self, rhs)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.w + rhs.w, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.w - rhs.w, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i + {}j + {}k", self.w, self.x, self.y, self.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const I: Quaternion = Quaternion::I;
    const J: Quaternion = Quaternion::J;
    const K: Quaternion = Quaternion::K;

    #[test]
    fn unit_products() {
        assert_eq!(I * J, K);
        assert_eq!(K * I, J);
        assert_eq!(J * K, I);
        assert_eq!(I * I, -Quaternion::ONE);
        assert_eq!(J * J, -Quaternion::ONE);
        assert_eq!(I * J * K, -Quaternion::ONE);
    }

    #[test]
    fn one_plus_i_times_one_minus_i() {
        let p = Quaternion::ONE + I;
        let q = Quaternion::ONE - I;
        assert_eq!(p * q, Quaternion::real(2.0));
    }

    #[test]
    fn matrices_agree_with_product() {
        let p = Quaternion::new(0.3, -1.2, 0.7, 2.0);
        let q = Quaternion::new(-0.5, 0.4, 1.1, -0.9);
        let left = p.left_matrix() * q.to_vector();
        let right = q.right_matrix() * p.to_vector();
        let direct = (p * q).to_vector();
        assert!((left - direct).norm() < 1e-14);
        assert!((right - direct).norm() < 1e-14);
    }

    fn quat() -> impl Strategy<Value = Quaternion> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
            .prop_map(|(w, x, y, z)| Quaternion::new(w, x, y, z))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn norm_is_multiplicative(p in quat(), q in quat()) {
            let lhs = (p * q).norm();
            let rhs = p.norm() * q.norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    proptest! {
        #[test]
        fn product_is_associative(p in quat(), q in quat(), r in quat()) {
            let d = ((p * q) * r - p * (q * r)).norm();
            prop_assert!(d <= 1e-12 * (p.norm() * q.norm() * r.norm()).max(1.0));
        }
    }
}
