use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::enumerate::enumerate_short_vectors;
use crate::error::{input, Result};
use crate::form::BBFLattice;
use crate::period::Period;
use crate::rational::{to_f64, QMatrix, Q};

/// γ = β + c₀·A·ω_ξ with β ∈ N = P^⊥.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecomposition {
    pub beta: Vec<Q>,
    /// proj_P γ = Σ coefficients[a]·ω_a, exact
    pub coefficients: [Q; 3],
    pub area_squared: Q,
    pub area: f64,
    pub xi: Option<[f64; 3]>,
}

impl ClassDecomposition {
    pub fn projection(&self, period: &Period) -> Vec<Q> {
        (0..period.rank())
            .map(|i| (0..3).fold(Q::zero(), |acc, a| acc + &self.coefficients[a] * &period.omega[a][i]))
            .collect()
    }

    /// β + c₀·A·ω_ξ evaluated in floating point.
    pub fn recompose_f64(&self, period: &Period) -> Vec<f64> {
        let frame = period.frame_f64();
        let s = to_f64(&period.c0) * self.area;
        self.beta
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let w = match self.xi {
                    Some(xi) => (0..3).map(|a| xi[a] * frame[a][i]).sum(),
                    None => 0.0,
                };
                to_f64(b) + s * w
            })
            .collect()
    }
}

pub fn class_decomposition(lattice: &BBFLattice, period: &Period, gamma: &[i64]) -> Result<ClassDecomposition> {
    if gamma.len() != lattice.rank || period.rank() != lattice.rank {
        return input(format!("class length {} does not match lattice rank {}", gamma.len(), lattice.rank));
    }
    let p = period.pairings(gamma);
    let coefficients: [Q; 3] = std::array::from_fn(|a| &p[a] / &period.norms[a]);
    let qp = (0..3).fold(Q::zero(), |acc, a| acc + &p[a] * &coefficients[a]);
    let area_squared = &period.kappa * qp;
    let area = to_f64(&area_squared).sqrt();
    let xi = if area_squared.is_zero() {
        None
    } else {
        let k = to_f64(&period.kappa);
        let scale = to_f64(&period.c0) * area;
        Some(std::array::from_fn(|a| to_f64(&coefficients[a]) * (to_f64(&period.norms[a]) / k).sqrt() / scale))
    };
    let beta = gamma
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let proj = (0..3).fold(Q::zero(), |acc, a| acc + &coefficients[a] * &period.omega[a][i]);
            Q::from_integer(BigInt::from(g)) - proj
        })
        .collect();
    Ok(ClassDecomposition { beta, coefficients, area_squared, area, xi })
}

/// Gram matrix of q̃(γ) = 2·q(proj_P γ) − q(γ), positive definite on ℤ^rank.
pub fn majorant_gram(lattice: &BBFLattice, period: &Period) -> QMatrix {
    let n = lattice.rank;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let gp = (0..3).fold(Q::zero(), |acc, a| {
                        acc + &period.dual[a][i] * &period.dual[a][j] / &period.norms[a]
                    });
                    gp * Q::from_integer(BigInt::from(2)) - Q::from_integer(BigInt::from(lattice.gram[i][j]))
                })
                .collect()
        })
        .collect()
}

pub fn majorant(lattice: &BBFLattice, period: &Period, gamma: &[i64]) -> Result<Q> {
    let d = class_decomposition(lattice, period, gamma)?;
    let qp = &d.area_squared / &period.kappa;
    Ok(qp * Q::from_integer(BigInt::from(2)) - Q::from_integer(BigInt::from(lattice.square(gamma)?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SquareFilter {
    /// q(γ,γ) ≥ −σ
    AtLeast,
    /// q(γ,γ) = −σ
    Exactly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionEntry {
    pub xi: [f64; 3],
    pub gamma: Vec<i64>,
    pub area: f64,
    pub area_squared: String,
    pub square: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionSet {
    pub a_max: String,
    pub sigma: i64,
    pub filter: SquareFilter,
    pub candidates: usize,
    pub entries: Vec<DirectionEntry>,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# a_max {} sigma {} entries {}\n", self.a_max, self.sigma, self.entries.len());
        for e in &self.entries {
            let g: Vec<String> = e.gamma.iter().map(|x| x.to_string()).collect();
            s.push_str(&format!(
                "{:.12} {:.12} {:.12} area {:.12} square {} gamma {}\n",
                e.xi[0],
                e.xi[1],
                e.xi[2],
                e.area,
                e.square,
                g.join(" ")
            ));
        }
        s
    }
}

pub fn admissible_directions(lattice: &BBFLattice, period: &Period, a_max: &Q, sigma: i64) -> Result<DirectionSet> {
    admissible_directions_with(lattice, period, a_max, sigma, SquareFilter::AtLeast)
}

pub fn admissible_directions_with(
    lattice: &BBFLattice,
    period: &Period,
    a_max: &Q,
    sigma: i64,
    filter: SquareFilter,
) -> Result<DirectionSet> {
    if sigma < 2 {
        return input(format!("sigma must be at least 2, got {sigma}"));
    }
    if !a_max.is_positive() {
        return input("a_max must be positive");
    }
    if period.rank() != lattice.rank {
        return input("period and lattice ranks differ");
    }
    let gram = majorant_gram(lattice, period);
    let a2max = a_max * a_max;
    let bound = &a2max * &period.c0 * Q::from_integer(BigInt::from(2)) + Q::from_integer(BigInt::from(sigma));
    let candidates = enumerate_short_vectors(&gram, &bound)
        .map_err(|_| crate::Error::Input("degenerate period: majorant is not positive definite".into()))?;
    let n_candidates = candidates.len();

    // key: projective class of the exact coefficient vector up to sign
    let mut best: BTreeMap<Vec<Q>, (Q, Vec<i64>, ClassDecomposition, i64)> = BTreeMap::new();
    for gamma in candidates {
        let square = lattice.square(&gamma)?;
        let keep = match filter {
            SquareFilter::AtLeast => square >= -sigma,
            SquareFilter::Exactly => square == -sigma,
        };
        if !keep {
            continue;
        }
        let d = class_decomposition(lattice, period, &gamma)?;
        if d.area_squared.is_zero() || d.area_squared > a2max {
            continue;
        }
        let lead = d.coefficients.iter().find(|c| !c.is_zero()).unwrap().clone();
        let key: Vec<Q> = d.coefficients.iter().map(|c| c / &lead).collect();
        // orient so the leading coefficient is positive
        let (gamma, d) = if lead.is_negative() {
            let neg: Vec<i64> = gamma.iter().map(|x| -x).collect();
            let dn = class_decomposition(lattice, period, &neg)?;
            (neg, dn)
        } else {
            (gamma, d)
        };
        let better = match best.get(&key) {
            None => true,
            Some((a2, g, _, _)) => d.area_squared < *a2 || (d.area_squared == *a2 && gamma < *g),
        };
        if better {
            best.insert(key, (d.area_squared.clone(), gamma, d, square));
        }
    }
    let mut entries: Vec<(Q, DirectionEntry)> = best
        .into_values()
        .map(|(a2, gamma, d, square)| {
            let e = DirectionEntry {
                xi: d.xi.expect("positive area has a direction"),
                gamma,
                area: d.area,
                area_squared: a2.to_string(),
                square,
            };
            (a2, e)
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.gamma.cmp(&b.1.gamma)));
    Ok(DirectionSet {
        a_max: a_max.to_string(),
        sigma,
        filter,
        candidates: n_candidates,
        entries: entries.into_iter().map(|(_, e)| e).collect(),
    })
}

/// Rank-6 instance with one planted class γ₀ = e₁ + e₂ − f₂ of square −2 and area 1.
///
/// Period ω₁ = 4e₁ + f₁, ω₂ = 2(e₂ + f₂), ω₃ = 2(e₃ + f₃), all of square 8. Since
/// the frame is integral and equinormal, A(γ)² = Σ_a q(γ, ω_a)², and q(γ, ω₂),
/// q(γ, ω₃) are even, so A ≤ 1 forces ξ = ±(1, 0, 0).
pub fn planted_u3() -> (BBFLattice, Period, Vec<i64>) {
    let lattice = BBFLattice::u3();
    let qv = |v: [i64; 6]| v.iter().map(|&x| Q::from_integer(BigInt::from(x))).collect::<Vec<_>>();
    let period = Period::new(
        &lattice,
        [qv([4, 1, 0, 0, 0, 0]), qv([0, 0, 2, 2, 0, 0]), qv([0, 0, 0, 0, 2, 2])],
    )
    .expect("planted period is valid");
    (lattice, period, vec![1, 0, 1, -1, 0, 0])
}
