use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Result};
use crate::form::BBFLattice;
use crate::rational::{congruence_diagonalize, dot, mat_vec, q_frac, to_f64, Q};

/// Positive 3-plane P ⊂ H²(ℚ) given by a q-orthogonal rational basis.
///
/// The basis need not have equal norms. κ is the norm of the first vector and
/// the q-orthonormal frame ω̂_a = ω_a·√(κ/κ_a) is used only in floating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Period {
    pub omega: [Vec<Q>; 3],
    pub norms: [Q; 3],
    pub kappa: Q,
    pub c0: Q,
    // q(e_i, ω_a) = (G ω_a)_i
    pub(crate) dual: [Vec<Q>; 3],
}

impl Period {
    pub fn new(lattice: &BBFLattice, omega: [Vec<Q>; 3]) -> Result<Self> {
        if omega.iter().any(|w| w.len() != lattice.rank) {
            return input(format!("period vectors must have length {}", lattice.rank));
        }
        if lattice.signature.0 != 3 {
            return input(format!(
                "lattice signature {:?} has no maximal positive 3-plane",
                lattice.signature
            ));
        }
        let g = lattice.gram_q();
        let dual = [mat_vec(&g, &omega[0]), mat_vec(&g, &omega[1]), mat_vec(&g, &omega[2])];
        for a in 0..3 {
            for b in 0..a {
                if !dot(&omega[a], &dual[b]).is_zero() {
                    return input(format!("period vectors {b} and {a} are not q-orthogonal"));
                }
            }
        }
        let norms = [dot(&omega[0], &dual[0]), dot(&omega[1], &dual[1]), dot(&omega[2], &dual[2])];
        if norms.iter().any(|n| !n.is_positive()) {
            return input("period plane is not positive definite");
        }
        let kappa = norms[0].clone();
        let c0 = Q::from_integer(BigInt::from(1)) / &kappa;
        Ok(Self { omega, norms, kappa, c0, dual })
    }

    /// Rational Gram–Schmidt on three spanning vectors.
    pub fn from_spanning(lattice: &BBFLattice, vectors: [Vec<Q>; 3]) -> Result<Self> {
        if vectors.iter().any(|w| w.len() != lattice.rank) {
            return input(format!("period vectors must have length {}", lattice.rank));
        }
        let g = lattice.gram_q();
        let mut out: Vec<Vec<Q>> = Vec::with_capacity(3);
        for v in vectors {
            let mut w = v.clone();
            for u in &out {
                let gu = mat_vec(&g, u);
                let nu = dot(u, &gu);
                let f = dot(&v, &gu) / nu;
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= &f * ui;
                }
            }
            if !dot(&w, &mat_vec(&g, &w)).is_positive() {
                return input("period vectors do not span a positive 3-plane");
            }
            out.push(w);
        }
        let [a, b, c]: [Vec<Q>; 3] = out.try_into().unwrap();
        Self::new(lattice, [a, b, c])
    }

    /// Seeded rational perturbation of a positive 3-plane found by congruence
    /// diagonalization, then Gram–Schmidt.
    pub fn generic(lattice: &BBFLattice, seed: u64) -> Result<Self> {
        if lattice.signature.0 != 3 {
            return input(format!(
                "lattice signature {:?} has no maximal positive 3-plane",
                lattice.signature
            ));
        }
        let (pivots, basis) = congruence_diagonalize(&lattice.gram_q());
        let seeds: Vec<Vec<Q>> = pivots
            .iter()
            .zip(&basis)
            .filter(|(p, _)| p.is_positive())
            .map(|(_, b)| b.clone())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dens = [7i64, 11, 13, 17, 19, 23];
        let mut scale = 1i64;
        for _ in 0..40 {
            // a few perturbed coordinates per vector keep the denominators small
            let vs: Vec<Vec<Q>> = seeds
                .iter()
                .map(|s| {
                    let mut v = s.clone();
                    for _ in 0..4 {
                        let i = rng.gen_range(0..v.len());
                        let p = rng.gen_range(-3..=3);
                        let d = dens[rng.gen_range(0..dens.len())] * scale;
                        v[i] += q_frac(p, d);
                    }
                    v
                })
                .collect();
            let [a, b, c]: [Vec<Q>; 3] = vs.try_into().unwrap();
            if let Ok(p) = Self::from_spanning(lattice, [a, b, c]) {
                return Ok(p);
            }
            scale *= 2;
        }
        input("could not perturb the period plane while keeping it positive")
    }

    pub fn rank(&self) -> usize {
        self.omega[0].len()
    }

    /// q(ω_a, ω_b) for the stored basis.
    pub fn gram(&self) -> [[Q; 3]; 3] {
        std::array::from_fn(|a| std::array::from_fn(|b| dot(&self.omega[a], &self.dual[b])))
    }

    /// True when the stored basis already satisfies q(ω_a, ω_b) = κ δ_ab.
    pub fn is_equinormal(&self) -> bool {
        self.norms[1] == self.kappa && self.norms[2] == self.kappa
    }

    /// q(γ, ω_a) for an integral class.
    pub fn pairings(&self, gamma: &[i64]) -> [Q; 3] {
        std::array::from_fn(|a| {
            gamma
                .iter()
                .zip(&self.dual[a])
                .filter(|(g, _)| **g != 0)
                .fold(Q::zero(), |acc, (g, d)| acc + d * Q::from_integer(BigInt::from(*g)))
        })
    }

    /// ω̂_a in floating point.
    pub fn frame_f64(&self) -> [Vec<f64>; 3] {
        std::array::from_fn(|a| {
            let s = (to_f64(&self.kappa) / to_f64(&self.norms[a])).sqrt();
            self.omega[a].iter().map(|x| s * to_f64(x)).collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{inertia, q_int};

    fn qv(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| q_int(x)).collect()
    }

    #[test]
    fn standard_u3_period() {
        let l = BBFLattice::u3();
        let p = Period::new(&l, [qv(&[1, 1, 0, 0, 0, 0]), qv(&[0, 0, 1, 1, 0, 0]), qv(&[0, 0, 0, 0, 1, 1])]).unwrap();
        assert!(p.is_equinormal());
        assert_eq!(p.kappa, q_int(2));
        assert_eq!(p.c0, q_frac(1, 2));
    }

    #[test]
    fn rejects_non_orthogonal_and_negative() {
        let l = BBFLattice::u3();
        assert!(Period::new(&l, [qv(&[1, 1, 0, 0, 0, 0]), qv(&[1, 1, 0, 0, 0, 0]), qv(&[0, 0, 0, 0, 1, 1])]).is_err());
        assert!(Period::new(&l, [qv(&[1, -1, 0, 0, 0, 0]), qv(&[0, 0, 1, 1, 0, 0]), qv(&[0, 0, 0, 0, 1, 1])]).is_err());
        assert!(Period::new(&l, [qv(&[1, 1, 0, 0, 0]), qv(&[0, 0, 1, 1, 0, 0]), qv(&[0, 0, 0, 0, 1, 1])]).is_err());
    }

    #[test]
    fn gram_schmidt_orthogonalizes() {
        let l = BBFLattice::u3();
        let p = Period::from_spanning(&l, [qv(&[1, 1, 0, 0, 0, 0]), qv(&[1, 2, 1, 1, 0, 0]), qv(&[0, 1, 0, 0, 2, 1])]).unwrap();
        let g = p.gram();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(g[a][b].is_zero(), a != b);
            }
        }
    }

    #[test]
    fn generic_k3_period_is_positive_and_seeded() {
        let l = BBFLattice::k3();
        let p = Period::generic(&l, 7).unwrap();
        let g = p.gram();
        let gm: Vec<Vec<Q>> = g.iter().map(|r| r.to_vec()).collect();
        assert_eq!(inertia(&gm), (3, 0, 0));
        assert_eq!(l.signature, (3, 19));
        assert_eq!(Period::generic(&l, 7).unwrap(), p);
        assert_ne!(Period::generic(&l, 8).unwrap(), p);
    }
}
