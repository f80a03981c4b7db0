use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::rational::{from_int_matrix, inertia, QMatrix};

/// Even or odd integral symmetric form on ℤ^rank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBFLattice {
    pub rank: usize,
    pub gram: Vec<Vec<i64>>,
    pub signature: (usize, usize),
}

const E8_EDGES: [(usize, usize); 7] = [(0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)];

impl BBFLattice {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let rank = gram.len();
        if rank == 0 {
            return input("empty Gram matrix");
        }
        if gram.iter().any(|row| row.len() != rank) {
            return input("Gram matrix is not square");
        }
        for i in 0..rank {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return input(format!("Gram matrix not symmetric at ({i}, {j})"));
                }
            }
        }
        let (p, n, z) = inertia(&from_int_matrix(&gram));
        if z > 0 {
            return input("degenerate Gram matrix (determinant 0)");
        }
        Ok(Self { rank, gram, signature: (p, n) })
    }

    pub fn hyperbolic_plane() -> Self {
        Self::new(vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    /// E₈ with the sign flipped, so roots have square −2.
    pub fn e8_negative() -> Self {
        let mut g = vec![vec![0i64; 8]; 8];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = -2;
        }
        for &(i, j) in &E8_EDGES {
            g[i][j] = 1;
            g[j][i] = 1;
        }
        Self::new(g).unwrap()
    }

    pub fn direct_sum(parts: &[BBFLattice]) -> Self {
        let rank = parts.iter().map(|p| p.rank).sum();
        let mut g = vec![vec![0i64; rank]; rank];
        let mut off = 0;
        for p in parts {
            for i in 0..p.rank {
                for j in 0..p.rank {
                    g[off + i][off + j] = p.gram[i][j];
                }
            }
            off += p.rank;
        }
        let signature = parts.iter().fold((0, 0), |(a, b), p| (a + p.signature.0, b + p.signature.1));
        Self { rank, gram: g, signature }
    }

    /// U³ ⊕ E₈(−1)², basis ordered e₁, f₁, e₂, f₂, e₃, f₃, then the two E₈ blocks.
    pub fn k3() -> Self {
        let u = Self::hyperbolic_plane();
        let e8 = Self::e8_negative();
        Self::direct_sum(&[u.clone(), u.clone(), u, e8.clone(), e8])
    }

    pub fn u3() -> Self {
        let u = Self::hyperbolic_plane();
        Self::direct_sum(&[u.clone(), u.clone(), u])
    }

    pub fn gram_q(&self) -> QMatrix {
        from_int_matrix(&self.gram)
    }

    pub fn eval(&self, a: &[i64], b: &[i64]) -> Result<i64> {
        if a.len() != self.rank || b.len() != self.rank {
            return input(format!(
                "vector lengths {} and {} do not match lattice rank {}",
                a.len(),
                b.len(),
                self.rank
            ));
        }
        let mut s = 0i64;
        for i in 0..self.rank {
            if a[i] == 0 {
                continue;
            }
            let row: i64 = self.gram[i].iter().zip(b).map(|(g, y)| g * y).sum();
            s += a[i] * row;
        }
        Ok(s)
    }

    pub fn square(&self, a: &[i64]) -> Result<i64> {
        self.eval(a, a)
    }

    pub fn basis_vector(&self, i: usize) -> Vec<i64> {
        let mut v = vec![0; self.rank];
        v[i] = 1;
        v
    }
}

/// q(a, b) for the free-standing form.
pub fn bbf_eval(lattice: &BBFLattice, a: &[i64], b: &[i64]) -> Result<i64> {
    lattice.eval(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_plane_values() {
        let u = BBFLattice::hyperbolic_plane();
        assert_eq!(u.eval(&[1, 0], &[0, 1]).unwrap(), 1);
        assert_eq!(u.square(&[1, 0]).unwrap(), 0);
        assert_eq!(u.signature, (1, 1));
    }

    #[test]
    fn e8_roots_square_to_minus_two() {
        let e8 = BBFLattice::e8_negative();
        assert_eq!(e8.signature, (0, 8));
        for i in 0..8 {
            assert_eq!(e8.square(&e8.basis_vector(i)).unwrap(), -2);
        }
        let mut highest = vec![2, 3, 4, 6, 5, 4, 3, 2];
        assert_eq!(e8.square(&highest).unwrap(), -2);
        highest[0] = 0;
        assert_ne!(e8.square(&highest).unwrap(), -2);
    }

    #[test]
    fn e8_is_unimodular() {
        let e8 = BBFLattice::e8_negative();
        let m = e8.gram_q();
        let inv = crate::rational::inverse(&m).unwrap();
        assert!(inv.iter().flatten().all(|x| x.is_integer()));
    }

    #[test]
    fn k3_signature() {
        let k3 = BBFLattice::k3();
        assert_eq!(k3.rank, 22);
        assert_eq!(k3.signature, (3, 19));
        let recomputed = BBFLattice::new(k3.gram.clone()).unwrap();
        assert_eq!(recomputed.signature, (3, 19));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BBFLattice::new(vec![vec![1, 2], vec![3, 1]]).is_err());
        assert!(BBFLattice::new(vec![vec![1, 1], vec![1, 1]]).is_err());
        assert!(BBFLattice::new(vec![vec![1, 1]]).is_err());
        let u = BBFLattice::hyperbolic_plane();
        assert!(u.eval(&[1], &[0, 1]).is_err());
    }
}
