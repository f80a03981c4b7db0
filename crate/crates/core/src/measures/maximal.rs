use crate::error::{input, Result};

/// `Mf(z) = max_{s = mh ≤ smax} (1/s) ∫_{B_s(z)} f` on a uniform 1D grid of spacing `h`.
///
/// Integrals use the trapezoid rule with half weights at `z ± s`; `f` vanishes off the grid.
pub fn hardy_littlewood_max(f: &[f64], h: f64, smax: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return input("grid spacing must be positive");
    }
    if f.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return input("maximal function needs a nonnegative finite input");
    }
    let n = f.len();
    let mmax = (smax / h + 1e-9).floor() as usize;
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + f[i];
    }
    let at = |k: isize| if k >= 0 && (k as usize) < n { f[k as usize] } else { 0.0 };
    let range = |lo: isize, hi: isize| -> f64 {
        let lo = lo.max(0) as usize;
        let hi = (hi.min(n as isize - 1) + 1).max(0) as usize;
        if hi <= lo {
            0.0
        } else {
            prefix[hi] - prefix[lo]
        }
    };
    Ok((0..n as isize)
        .map(|i| {
            let mut best: f64 = 0.0;
            for m in 1..=mmax as isize {
                let inner = range(i - m + 1, i + m - 1);
                let ends = 0.5 * (at(i - m) + at(i + m));
                best = best.max((inner + ends) * h / (m as f64 * h));
            }
            best
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constants() {
        let h = 0.01;
        let m = hardy_littlewood_max(&vec![1.0; 401], h, 1.0).unwrap();
        for v in &m[100..=300] {
            assert!((v - 2.0).abs() < 1e-12);
        }
        assert!(hardy_littlewood_max(&vec![0.0; 50], h, 1.0).unwrap().iter().all(|&v| v == 0.0));
        assert!(hardy_littlewood_max(&[-1.0], h, 1.0).is_err());
    }

    #[test]
    fn unit_mass_decays_like_inverse_distance() {
        let h = 0.001;
        let n = 2001;
        let mut f = vec![0.0; n];
        f[1000] = 1.0 / h;
        let m = hardy_littlewood_max(&f, h, 1.0).unwrap();
        for k in [20, 50, 200, 900] {
            let z = k as f64 * h;
            assert!((m[1000 + k] * z - 1.0).abs() < 0.1, "{}", m[1000 + k] * z);
        }
    }

    #[test]
    fn weak_type_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = 0.01;
        for _ in 0..50 {
            let f: Vec<f64> = (0..300).map(|_| if rng.gen_bool(0.1) { rng.gen_range(0.0..10.0) } else { 0.0 }).collect();
            let l1: f64 = f.iter().sum::<f64>() * h;
            let m = hardy_littlewood_max(&f, h, 1.0).unwrap();
            for delta in [0.1, 1.0, 5.0, 20.0] {
                let meas = m.iter().filter(|&&v| v >= delta).count() as f64 * h;
                assert!(meas <= 4.0 * l1 / delta + 1e-12);
            }
        }
    }
}
