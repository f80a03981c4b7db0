use nalgebra::{DMatrix, DVector};

use crate::quaternion::Quaternion;

/// Left multiplication by `e_a` on each factor of `ℍⁿ`.
fn left_block(a: usize, n: usize) -> DMatrix<f64> {
    let block = Quaternion::UNITS[a].left_matrix();
    let mut m = DMatrix::zeros(4 * n, 4 * n);
    for f in 0..n {
        m.view_mut((4 * f, 4 * f), (4, 4)).copy_from(&block);
    }
    m
}

/// `ι(ω_a)` for the self-dual basis `ω₁ = e⁰¹ + e²³`, `ω₂ = e⁰² + e³¹`, `ω₃ = e⁰³ + e¹²`,
/// normalized by `ω(x, y) = ⟨ι(ω) x, y⟩`.
pub fn iota(a: usize) -> DMatrix<f64> {
    left_block(a, 1)
}

/// `ΨT = Σ I(ω_a) ∘ T ∘ ι(ω_a)` on `T ∈ Hom(ℝ⁴, ℍⁿ)`, applied directly.
pub fn psi_apply(t: &DMatrix<f64>) -> DMatrix<f64> {
    let n = t.nrows() / 4;
    let mut out = DMatrix::zeros(4 * n, 4);
    for a in 0..3 {
        out += left_block(a, n) * t * iota(a);
    }
    out
}

/// Matrix of `Ψ` on column-major vectorized `4n × 4` matrices.
pub fn psi_endomorphism(n: usize) -> DMatrix<f64> {
    let m = 16 * n;
    let mut psi = DMatrix::zeros(m, m);
    for c in 0..m {
        let mut e = DVector::zeros(m);
        e[c] = 1.0;
        let t = DMatrix::from_column_slice(4 * n, 4, e.as_slice());
        let pt = psi_apply(&t);
        psi.set_column(c, &DVector::from_column_slice(pt.as_slice()));
    }
    psi
}
