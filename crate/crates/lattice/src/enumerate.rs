//! Fincke–Pohst enumeration of short vectors of a positive-definite
//! rational form, with a brute-force box search as reference.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{input, Result};
use crate::rational::{common_denominator, inverse, is_symmetric, ldl_upper, to_f64, QMatrix, Q};

/// All integral x with xᵀGx ≤ bound, zero included, sorted lexicographically.
pub fn enumerate_short_vectors(gram: &QMatrix, bound: &Q) -> Result<Vec<Vec<i64>>> {
    if !is_symmetric(gram) {
        return input("Gram matrix must be square and symmetric");
    }
    let n = gram.len();
    let Some((d, mu)) = ldl_upper(gram) else {
        return input("form is not positive definite");
    };
    if bound.is_negative() {
        return Ok(Vec::new());
    }
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    // row i of μ as integers over a common denominator, so the inner shift is an integer dot product
    let rows: Vec<(Vec<BigInt>, BigInt)> = (0..n)
        .map(|i| {
            let den = common_denominator(&vec![mu[i][i + 1..].to_vec()]);
            let num = mu[i][i + 1..].iter().map(|m| (m * Q::from_integer(den.clone())).to_integer()).collect();
            (num, den)
        })
        .collect();
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    let mut rest = vec![Q::zero(); n + 1];
    rest[n] = bound.clone();
    descend(n - 1, &d, &rows, &mut x, &mut rest, &mut out);
    out.sort();
    Ok(out)
}

fn descend(
    i: usize,
    d: &[Q],
    rows: &[(Vec<BigInt>, BigInt)],
    x: &mut [i64],
    rest: &mut [Q],
    out: &mut Vec<Vec<i64>>,
) {
    let (num, den) = &rows[i];
    let mut acc = BigInt::zero();
    for (k, m) in num.iter().enumerate() {
        let xj = x[i + 1 + k];
        if xj != 0 {
            acc += m * xj;
        }
    }
    let shift = Q::new(acc, den.clone());
    let t = rest[i + 1].clone();
    let c = -to_f64(&shift);
    let r = (to_f64(&t) / to_f64(&d[i])).max(0.0).sqrt();
    // widen the float interval by one and decide each endpoint exactly
    let lo = (c - r).floor() as i64 - 1;
    let hi = (c + r).ceil() as i64 + 1;
    for xi in lo..=hi {
        let y = Q::from_integer(BigInt::from(xi)) + &shift;
        let used = &d[i] * &y * &y;
        if used > t {
            continue;
        }
        x[i] = xi;
        if i == 0 {
            out.push(x.to_vec());
        } else {
            rest[i] = &t - used;
            descend(i - 1, d, rows, x, rest, out);
        }
    }
    x[i] = 0;
}

/// Half-widths of the box containing every x with xᵀGx ≤ bound:
/// |x_i| ≤ √(bound · (G⁻¹)_ii).
pub fn cholesky_box(gram: &QMatrix, bound: &Q) -> Result<Vec<i64>> {
    if ldl_upper(gram).is_none() {
        return input("form is not positive definite");
    }
    let inv = inverse(gram).expect("positive definite forms are invertible");
    Ok((0..gram.len())
        .map(|i| {
            let v = to_f64(&(bound * &inv[i][i])).max(0.0);
            let mut m = v.sqrt().floor() as i64;
            while Q::from_integer(BigInt::from((m + 1) * (m + 1))) <= bound * &inv[i][i] {
                m += 1;
            }
            while m > 0 && Q::from_integer(BigInt::from(m * m)) > bound * &inv[i][i] {
                m -= 1;
            }
            m
        })
        .collect())
}

/// Exhaustive search over the Cholesky box, in exact integer arithmetic.
pub fn brute_force_short_vectors(gram: &QMatrix, bound: &Q) -> Result<Vec<Vec<i64>>> {
    if !is_symmetric(gram) {
        return input("Gram matrix must be square and symmetric");
    }
    if bound.is_negative() {
        return Ok(Vec::new());
    }
    let half = cholesky_box(gram, bound)?;
    let den = common_denominator(gram);
    let g: Vec<Vec<i128>> = gram
        .iter()
        .map(|row| row.iter().map(|v| (v * &den).to_integer().to_i128().expect("Gram entry fits i128")).collect())
        .collect();
    // xᵀ(den·G)x ≤ bound·den, and both sides integral after flooring the right
    let limit = (bound * Q::from_integer(den)).floor().to_integer().to_i128().expect("bound fits i128");
    let n = gram.len();
    let mut out = Vec::new();
    let mut x: Vec<i64> = half.iter().map(|h| -h).collect();
    loop {
        let mut s: i128 = 0;
        for i in 0..n {
            let xi = x[i] as i128;
            if xi == 0 {
                continue;
            }
            let row: i128 = (0..n).map(|j| g[i][j] * x[j] as i128).sum();
            s += xi * row;
        }
        if s <= limit {
            out.push(x.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                out.sort();
                return Ok(out);
            }
            if x[k] < half[k] {
                x[k] += 1;
                break;
            }
            x[k] = -half[k];
            k += 1;
        }
    }
}

/// Seeded positive-definite integral form G = BᵀB + I of rank 1..=6 with a bound in 1..=50.
pub fn seeded_form(seed: u64) -> (QMatrix, Q) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6usize);
    let b: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect()).collect();
    let g: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| b[k][i] * b[k][j]).sum::<i64>() + i64::from(i == j)).collect())
        .collect();
    let bound = rng.gen_range(1..=50i64);
    (crate::rational::from_int_matrix(&g), Q::from_integer(BigInt::from(bound)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{from_int_matrix, q_frac, q_int};

    #[test]
    fn identity_rank_two() {
        let g = from_int_matrix(&[vec![1, 0], vec![0, 1]]);
        let v = enumerate_short_vectors(&g, &q_int(1)).unwrap();
        assert_eq!(v, vec![vec![-1, 0], vec![0, -1], vec![0, 0], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn diag_one_three() {
        let g = from_int_matrix(&[vec![1, 0], vec![0, 3]]);
        let v = enumerate_short_vectors(&g, &q_int(3)).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v, brute_force_short_vectors(&g, &q_int(3)).unwrap());
    }

    #[test]
    fn rational_entries_and_bound() {
        let g = vec![vec![q_frac(3, 2), q_frac(1, 3)], vec![q_frac(1, 3), q_frac(5, 7)]];
        for b in [q_frac(1, 2), q_int(2), q_frac(37, 5)] {
            assert_eq!(enumerate_short_vectors(&g, &b).unwrap(), brute_force_short_vectors(&g, &b).unwrap());
        }
    }

    #[test]
    fn boundary_vectors_are_kept() {
        // (1, 1) has norm exactly 2
        let g = from_int_matrix(&[vec![1, 0], vec![0, 1]]);
        let v = enumerate_short_vectors(&g, &q_int(2)).unwrap();
        assert!(v.contains(&vec![1, 1]));
        assert_eq!(v.len(), 9);
    }

    #[test]
    fn rejects_indefinite() {
        let g = from_int_matrix(&[vec![0, 1], vec![1, 0]]);
        assert!(enumerate_short_vectors(&g, &q_int(1)).is_err());
        assert!(brute_force_short_vectors(&g, &q_int(1)).is_err());
    }

    #[test]
    fn negative_bound_is_empty() {
        let g = from_int_matrix(&[vec![2]]);
        assert!(enumerate_short_vectors(&g, &q_int(-1)).unwrap().is_empty());
        assert_eq!(enumerate_short_vectors(&g, &q_int(0)).unwrap(), vec![vec![0]]);
    }
}
