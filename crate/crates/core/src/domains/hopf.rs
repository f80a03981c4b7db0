use nalgebra::Vector4;

use crate::error::{input, Result};
use crate::quaternion::Quaternion;

/// `q ↦ q i q̄`, constant along the orbits of `v₁(q) = q·i`.
pub fn hopf_map(q: Quaternion) -> Result<Quaternion> {
    if (q.norm() - 1.0).abs() > 1e-10 {
        return input(format!("Hopf map needs a unit quaternion, |q| = {}", q.norm()));
    }
    Ok(q * Quaternion::I * q.conj())
}

/// `dπ_q(v) = v i q̄ + q i v̄`.
pub fn hopf_differential(q: Quaternion, v: Quaternion) -> Quaternion {
    v * Quaternion::I * q.conj() + q * Quaternion::I * v.conj()
}

/// Hopf map on ambient `(w, x, y, z)` coordinates, returning the imaginary part.
pub fn hopf_point(x: &Vector4<f64>) -> nalgebra::Vector3<f64> {
    let q = Quaternion::from_vector(x);
    (q * Quaternion::I * q.conj()).imag()
}

/// Distance in `ℝ⁴` from `x ∈ S³` to the great circle `{q : q i q̄ = −i}`.
pub fn distance_to_blowup_circle(x: &Vector4<f64>) -> f64 {
    // the circle is {z₁ = 0}: points (0, 0, cos β, sin β)
    let r = (x[2] * x[2] + x[3] * x[3]).sqrt();
    (x[0] * x[0] + x[1] * x[1] + (r - 1.0).powi(2)).sqrt()
}

/// Geodesic distance on S³ to the same circle.
pub fn geodesic_distance_to_blowup_circle(x: &Vector4<f64>) -> f64 {
    (x[2] * x[2] + x[3] * x[3]).sqrt().min(1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_fiber() {
        assert_eq!(hopf_map(Quaternion::ONE).unwrap(), Quaternion::I);
        for k in 0..16 {
            let t = k as f64 * 0.4;
            let q = Quaternion::new(t.cos(), t.sin(), 0.0, 0.0);
            let p = hopf_map(q).unwrap();
            assert!((p - Quaternion::I).norm() < 1e-12);
        }
        let p = hopf_map(Quaternion::J).unwrap();
        assert!((p + Quaternion::I).norm() < 1e-15);
        assert!(hopf_map(Quaternion::new(2.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn fiber_rotation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let q = Quaternion::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize();
            let t = rng.gen_range(-3.0..3.0);
            let a = hopf_map(q).unwrap();
            let b = hopf_map(q * Quaternion::exp_unit(Quaternion::I, t)).unwrap();
            assert!((a - b).norm() < 1e-12);
            assert!(hopf_differential(q, q * Quaternion::I).norm() < 1e-12);
        }
    }

    #[test]
    fn blowup_circle_maps_to_minus_i() {
        for k in 0..12 {
            let b = k as f64 * 0.5;
            let x = Vector4::new(0.0, 0.0, b.cos(), b.sin());
            assert!((hopf_point(&x) - nalgebra::Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);
            assert!(distance_to_blowup_circle(&x) < 1e-12);
        }
    }
}
