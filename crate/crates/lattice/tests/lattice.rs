use bbf_lattice::rational::{q_frac, q_int, to_f64};
use bbf_lattice::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn enumeration_matches_brute_force_on_seeded_forms() {
    for seed in 0..20 {
        let (g, bound) = seeded_form(seed);
        assert!(g.len() <= 6);
        assert!(bound <= q_int(50));
        let fp = enumerate_short_vectors(&g, &bound).unwrap();
        let bf = brute_force_short_vectors(&g, &bound).unwrap();
        assert_eq!(fp, bf, "seed {seed}");
    }
}

#[test]
fn enumeration_is_sorted_and_contains_zero() {
    let (g, bound) = seeded_form(3);
    let v = enumerate_short_vectors(&g, &bound).unwrap();
    assert!(v.windows(2).all(|w| w[0] < w[1]));
    assert!(v.contains(&vec![0; g.len()]));
}

#[test]
fn k3_signature_by_eigenvalue_count() {
    let k3 = BBFLattice::k3();
    assert_eq!(k3.signature, (3, 19));
    let m = DMatrix::from_fn(22, 22, |i, j| k3.gram[i][j] as f64);
    let eig = m.symmetric_eigen().eigenvalues;
    let pos = eig.iter().filter(|&&e| e > 1e-9).count();
    let neg = eig.iter().filter(|&&e| e < -1e-9).count();
    assert_eq!((pos, neg), (3, 19));
}

#[test]
fn planted_instance_matches_brute_force_over_majorant_box() {
    let (l, p, g0) = planted_u3();
    let a_max = q_int(1);
    let set = admissible_directions(&l, &p, &a_max, 2).unwrap();
    assert_eq!(set.len(), 1);
    let xi0 = class_decomposition(&l, &p, &g0).unwrap().xi.unwrap();
    assert_eq!(set.entries[0].xi, xi0);

    // independent check: every class in the q̃-box passing the filters has ξ = ±ξ(γ₀)
    let gram = majorant_gram(&l, &p);
    let bound = q_int(2) * &p.c0 * &a_max * &a_max + q_int(2);
    let all = brute_force_short_vectors(&gram, &bound).unwrap();
    let mut hits = 0;
    for gamma in &all {
        let d = class_decomposition(&l, &p, gamma).unwrap();
        if l.square(gamma).unwrap() < -2 || d.area_squared == q_int(0) || d.area_squared > q_int(1) {
            continue;
        }
        let xi = d.xi.unwrap();
        assert!((xi[0].abs() - 1.0).abs() < 1e-12, "{gamma:?}");
        hits += 1;
    }
    assert!(hits >= 2);

    assert!(admissible_directions(&l, &p, &q_frac(1, 2), 2).unwrap().is_empty());
}

#[test]
fn directions_are_monotone_in_area_bound() {
    let (l, p, _) = planted_u3();
    let small = admissible_directions(&l, &p, &q_int(1), 2).unwrap();
    let large = admissible_directions(&l, &p, &q_int(2), 2).unwrap();
    assert!(large.len() >= small.len());
    for e in &small.entries {
        assert!(large.entries.iter().any(|f| f.xi == e.xi));
    }
    let k3 = BBFLattice::k3();
    let pk = Period::generic(&k3, 5).unwrap();
    let a = admissible_directions(&k3, &pk, &q_frac(1, 2), 2).unwrap();
    let b = admissible_directions(&k3, &pk, &q_int(1), 2).unwrap();
    for e in &a.entries {
        assert!(b.entries.iter().any(|f| f.xi == e.xi));
    }
}

#[test]
fn tiny_area_bound_is_empty_for_generic_period() {
    let l = BBFLattice::u3();
    let p = Period::generic(&l, 11).unwrap();
    assert!(admissible_directions(&l, &p, &q_frac(1, 1000), 2).unwrap().is_empty());
}

#[test]
fn returned_classes_satisfy_constraints_and_recompose() {
    let k3 = BBFLattice::k3();
    let p = Period::generic(&k3, 2).unwrap();
    let a_max = q_int(1);
    let sigma = 2;
    let set = admissible_directions(&k3, &p, &a_max, sigma).unwrap();
    assert!(!set.is_empty());
    let bound = q_int(2) * &p.c0 * &a_max * &a_max + q_int(sigma);
    for e in &set.entries {
        assert!(e.square >= -sigma);
        assert!(e.area > 0.0 && e.area <= 1.0 + 1e-12);
        assert!(majorant(&k3, &p, &e.gamma).unwrap() <= bound);
        let d = class_decomposition(&k3, &p, &e.gamma).unwrap();
        let proj = d.projection(&p);
        for i in 0..22 {
            assert_eq!(&d.beta[i] + &proj[i], q_int(e.gamma[i]));
        }
        // β lies in N
        let g = k3.gram_q();
        for w in &p.omega {
            let gw = rational::mat_vec(&g, w);
            assert_eq!(rational::dot(&d.beta, &gw), q_int(0));
        }
        let r = d.recompose_f64(&p);
        for (a, b) in r.iter().zip(&e.gamma) {
            assert!((a - *b as f64).abs() < 1e-10);
        }
    }
    // ±ξ are merged
    for (i, a) in set.entries.iter().enumerate() {
        for b in &set.entries[i + 1..] {
            let dot: f64 = (0..3).map(|k| a.xi[k] * b.xi[k]).sum();
            assert!((dot.abs() - 1.0).abs() > 1e-9);
        }
    }
}

#[test]
fn k3_equality_filter_selects_minus_two_classes() {
    let k3 = BBFLattice::k3();
    let p = Period::generic(&k3, 2).unwrap();
    let at_least = admissible_directions(&k3, &p, &q_int(1), 2).unwrap();
    let exact = admissible_directions_with(&k3, &p, &q_int(1), 2, SquareFilter::Exactly).unwrap();
    assert!(!exact.is_empty());
    assert!(exact.entries.iter().all(|e| e.square == -2));
    assert!(exact.len() <= at_least.len());
    // K3 is even, so q ≥ −2 leaves only the squares −2 and ≥ 0
    assert!(at_least.entries.iter().all(|e| e.square == -2 || e.square >= 0));
}

#[test]
fn direction_set_serializes() {
    let (l, p, _) = planted_u3();
    let set = admissible_directions(&l, &p, &q_int(1), 2).unwrap();
    let v: serde_json::Value = serde_json::to_value(&set).unwrap();
    assert_eq!(v["entries"][0]["square"], -2);
    assert_eq!(v["entries"][0]["xi"][0], 1.0);
    assert_eq!(v["filter"], "at-least");
    assert!(set.to_text().contains("square -2"));
}

#[test]
fn lattice_file_resolves_generic_period() {
    let mut text = String::from("rank 22\ngram\n");
    for row in &BBFLattice::k3().gram {
        let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        text.push_str(&r.join(" "));
        text.push('\n');
    }
    text.push_str("period generic 4\n");
    let f = LatticeFile::parse(&text).unwrap();
    assert_eq!(f.lattice.signature, (3, 19));
    let p = f.period().unwrap().unwrap();
    assert_eq!(p, Period::generic(&f.lattice, 4).unwrap());
    assert!(to_f64(&p.kappa) > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_classes_recompose(seed in 0u64..1000, gamma in proptest::collection::vec(-5i64..=5, 22)) {
        let k3 = BBFLattice::k3();
        let p = Period::generic(&k3, seed % 4).unwrap();
        let d = class_decomposition(&k3, &p, &gamma).unwrap();
        let r = d.recompose_f64(&p);
        for (a, b) in r.iter().zip(&gamma) {
            prop_assert!((a - *b as f64).abs() < 1e-10);
        }
        prop_assert_eq!(d.xi.is_none(), d.area_squared == q_int(0));
        if let Some(xi) = d.xi {
            let n: f64 = xi.iter().map(|x| x * x).sum();
            prop_assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_forms_match_brute_force(entries in proptest::collection::vec(-2i64..=2, 9), bound in 0i64..=30) {
        // G = BᵀB + I for a random 3×3 B
        let b: Vec<Vec<i64>> = entries.chunks(3).map(|c| c.to_vec()).collect();
        let g: Vec<Vec<i64>> = (0..3)
            .map(|i| (0..3).map(|j| (0..3).map(|k| b[k][i] * b[k][j]).sum::<i64>() + i64::from(i == j)).collect())
            .collect();
        let gq = rational::from_int_matrix(&g);
        prop_assert_eq!(
            enumerate_short_vectors(&gq, &q_int(bound)).unwrap(),
            brute_force_short_vectors(&gq, &q_int(bound)).unwrap()
        );
    }
}
