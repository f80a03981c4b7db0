//! Dense matrices over ℚ, just enough for congruence diagonalization,
//! LDLᵀ factors and inverses.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;
pub type QMatrix = Vec<Vec<Q>>;

pub fn q_int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn from_int_matrix(m: &[Vec<i64>]) -> QMatrix {
    m.iter().map(|row| row.iter().map(|&v| q_int(v)).collect()).collect()
}

pub fn is_square(m: &QMatrix) -> bool {
    m.iter().all(|row| row.len() == m.len())
}

pub fn is_symmetric(m: &QMatrix) -> bool {
    is_square(m) && (0..m.len()).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

pub fn mat_vec(m: &QMatrix, v: &[Q]) -> Vec<Q> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Q::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Sylvester inertia (positive, negative, zero) by symmetric elimination.
/// Returns the congruence basis too: columns `basis[k]` with
/// `basis[k]ᵀ M basis[l] = δ_kl · pivots[k]`.
pub fn congruence_diagonalize(m: &QMatrix) -> (Vec<Q>, Vec<Vec<Q>>) {
    let n = m.len();
    let mut a = m.clone();
    // basis vectors as rows: row k of `b` is the k-th transformed basis vector
    let mut b: QMatrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !a[i][i].is_zero()) {
                a.swap(k, i);
                for row in a.iter_mut() {
                    row.swap(k, i);
                }
                b.swap(k, i);
            } else if let Some((i, j)) = (k..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !a[i][j].is_zero())
            {
                // replace e_i by e_i + e_j; all diagonals from k on vanish, so the new diagonal is 2a_ij
                for c in 0..n {
                    let t = a[j][c].clone();
                    a[i][c] += t;
                }
                for r in 0..n {
                    let t = a[r][j].clone();
                    a[r][i] += t;
                }
                for c in 0..n {
                    let t = b[j][c].clone();
                    b[i][c] += t;
                }
                a.swap(k, i);
                for row in a.iter_mut() {
                    row.swap(k, i);
                }
                b.swap(k, i);
            } else {
                pivots.extend(std::iter::repeat(Q::zero()).take(n - k));
                break;
            }
        }
        let p = a[k][k].clone();
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for c in 0..n {
                let t = &f * &a[k][c];
                a[i][c] -= t;
            }
            for r in 0..n {
                let t = &f * &a[r][k];
                a[r][i] -= t;
            }
            for c in 0..n {
                let t = &f * &b[k][c];
                b[i][c] -= t;
            }
        }
        pivots.push(p);
    }
    (pivots, b)
}

pub fn inertia(m: &QMatrix) -> (usize, usize, usize) {
    let (pivots, _) = congruence_diagonalize(m);
    let pos = pivots.iter().filter(|p| p.is_positive()).count();
    let neg = pivots.iter().filter(|p| p.is_negative()).count();
    (pos, neg, pivots.len() - pos - neg)
}

pub fn inverse(m: &QMatrix) -> Option<QMatrix> {
    let n = m.len();
    let mut a: QMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        let pv = a[c][c].clone();
        for x in a[c].iter_mut() {
            *x /= &pv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                let pivot_row = a[c].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Fincke–Pohst factors: q(x) = Σ_i d_i (x_i + Σ_{j>i} μ_ij x_j)².
/// `None` unless `m` is positive definite.
pub fn ldl_upper(m: &QMatrix) -> Option<(Vec<Q>, QMatrix)> {
    let n = m.len();
    let mut a = m.clone();
    for i in 0..n {
        if !a[i][i].is_positive() {
            return None;
        }
        for j in i + 1..n {
            let t = &a[i][j] / &a[i][i];
            a[j][i] = a[i][j].clone();
            a[i][j] = t;
        }
        for k in i + 1..n {
            for l in k..n {
                let t = &a[k][i] * &a[i][l];
                a[k][l] -= t;
            }
        }
    }
    let d = (0..n).map(|i| a[i][i].clone()).collect();
    let mu = (0..n)
        .map(|i| (0..n).map(|j| if j > i { a[i][j].clone() } else { Q::zero() }).collect())
        .collect();
    Some((d, mu))
}

/// Smallest common denominator of all entries; the matrix times it is integral.
pub fn common_denominator(m: &QMatrix) -> BigInt {
    use num_integer::Integer;
    m.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inertia_of_hyperbolic_plane() {
        let m = from_int_matrix(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(inertia(&m), (1, 1, 0));
    }

    #[test]
    fn congruence_basis_diagonalizes() {
        let m = from_int_matrix(&[vec![0, 1, 2], vec![1, 0, -1], vec![2, -1, 3]]);
        let (pivots, b) = congruence_diagonalize(&m);
        for k in 0..3 {
            for l in 0..3 {
                let v = dot(&b[k], &mat_vec(&m, &b[l]));
                let want = if k == l { pivots[k].clone() } else { Q::zero() };
                assert_eq!(v, want);
            }
        }
    }

    #[test]
    fn degenerate_form_has_zero_pivot() {
        let m = from_int_matrix(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(inertia(&m), (1, 0, 1));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = from_int_matrix(&[vec![2, 1], vec![1, 3]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(inv[0][0], q_frac(3, 5));
        assert_eq!(inv[0][1], q_frac(-1, 5));
        assert!(inverse(&from_int_matrix(&[vec![1, 2], vec![2, 4]])).is_none());
    }

    #[test]
    fn ldl_reconstructs_form() {
        let m = from_int_matrix(&[vec![4, 2, 1], vec![2, 3, 0], vec![1, 0, 2]]);
        let (d, mu) = ldl_upper(&m).unwrap();
        let x = [q_int(1), q_int(-2), q_int(3)];
        let mut s = Q::zero();
        for i in 0..3 {
            let mut t = x[i].clone();
            for j in i + 1..3 {
                t += &mu[i][j] * &x[j];
            }
            s += &d[i] * &t * &t;
        }
        assert_eq!(s, dot(&x, &mat_vec(&m, &x)));
        assert!(ldl_upper(&from_int_matrix(&[vec![0, 1], vec![1, 0]])).is_none());
    }
}
