use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;

use super::*;
use crate::niven::solve;

fn cone() -> Vec<f64> {
    vec![-1.0, 4.0 / 3.0, 4.0]
}

fn cone_exact() -> ConeParams {
    ConeParams::parse("-1,4/3,4").unwrap()
}

#[test]
fn trivial_quadric_harmonic() {
    let h = harmonic_for(&cone(), &[0, 0, 0], &[1, 0], 1e-14).unwrap();
    assert!((h.expanded.coeff(&[2, 0, 0]) - 1.0).abs() < 1e-14);
    assert!((h.expanded.coeff(&[0, 2, 0]) + 0.75).abs() < 1e-14);
    assert!((h.expanded.coeff(&[0, 0, 2]) + 0.25).abs() < 1e-14);
    assert!(h.brackets().unwrap()[0].abs() < 1e-14);
    let exact = rational_solution(&cone_exact(), &[0, 0, 0], &h.xi.xi).unwrap();
    assert_eq!(exact, vec![Rational::new()]);
    let q = expand_exact(&cone_exact(), &[0, 0, 0], &exact);
    assert!(q.laplacian().is_zero());
    let (_, rem) = q.div_rem(&cone_exact().quadric());
    assert!(rem.is_zero());
}

#[test]
fn empty_product_is_the_coordinate_monomial() {
    let h = harmonic_for(&cone(), &[1, 1, 1], &[0, 0], 1e-14).unwrap();
    assert_eq!(h.expanded.len(), 1);
    assert_eq!(h.expanded.coeff(&[1, 1, 1]), 1.0);
    assert!(h.expanded.laplacian().is_zero());
    assert_eq!(h.p_factor, vec![1.0]);
}

#[test]
fn brackets_vanish_at_solution_and_move_with_the_hessian() {
    let h = harmonic_for(&cone(), &[0, 0, 0], &[2, 1], 1e-13).unwrap();
    assert!(h.brackets().unwrap().iter().all(|b| b.abs() <= 1e-12));
    let delta = 1e-3;
    let hess = h.problem.potential(&h.xi.xi).unwrap().hessian;
    for k in 0..3 {
        let mut moved = h.xi.clone();
        moved.xi[k] += delta;
        let b = build_q(&h.problem, &moved).unwrap().brackets().unwrap();
        for (l, bl) in b.iter().enumerate() {
            let predicted = -hess[l][k] * delta;
            assert!(
                (bl - predicted).abs() <= 1e-2 * hess[l][k].abs() * delta + 1e-9,
                "{bl} vs {predicted}"
            );
        }
    }
}

#[test]
fn laplacian_two_ways_and_parity() {
    for degree in 1..=12 {
        for (eps, m) in enumerate_indices(3, degree) {
            let h = harmonic_for(&cone(), &eps, &m, 1e-12).unwrap();
            assert!(
                h.laplacian_residual() <= 1e-9,
                "{eps:?} {m:?}: {}",
                h.laplacian_residual()
            );
            assert!(h.laplacian_agreement().unwrap() <= 1e-9);
            assert!(h.has_parity());
        }
    }
    for (eps, m) in [
        (vec![1u8, 0, 1], vec![5usize, 4]),
        (vec![0, 0, 0], vec![3, 7]),
    ] {
        let h = harmonic_for(&cone(), &eps, &m, 1e-12).unwrap();
        assert!(h.laplacian_agreement().unwrap() <= 1e-9);
    }
}

#[test]
fn non_solution_is_not_harmonic() {
    let h = harmonic_for(&cone(), &[0, 1, 0], &[1, 1], 1e-12).unwrap();
    let mut off = h.xi.clone();
    off.xi[0] += 0.1;
    let bad = build_q(&h.problem, &off).unwrap();
    assert!(bad.laplacian_residual() > 1e-3);
    assert!(bad.laplacian_agreement().unwrap() <= 1e-12);
}

#[test]
fn large_degree_harmonic() {
    let h = harmonic_for(&cone(), &[1, 1, 0], &[31, 13], 1e-10).unwrap();
    assert_eq!(h.degree(), 90);
    assert!(h.laplacian_residual() <= 1e-9, "{}", h.laplacian_residual());
}

#[test]
fn enumeration_matches_harmonic_dimension() {
    for d in [2usize, 3, 4] {
        for n in 0..=12 {
            assert_eq!(
                enumerate_indices(d, n).len(),
                spherical_harmonic_dim(d, n),
                "d={d} N={n}"
            );
        }
    }
    assert_eq!(spherical_harmonic_dim(3, 5), 11);
}

#[test]
fn conical_coordinates_of_the_unit_diagonal() {
    let c = cartesian_to_conical(&[1.0, 1.0, 1.0], &cone()).unwrap();
    assert!((c.r - 3f64.sqrt()).abs() < 1e-15);
    assert!(c.s[0].abs() < 1e-15);
    assert!((c.s[1] - 26.0 / 9.0).abs() < 1e-14);
}

#[test]
fn conical_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let d = rng.gen_range(2..=5);
        let mut a = vec![rng.gen_range(-2.0..0.0)];
        for _ in 1..d {
            let last = *a.last().unwrap();
            a.push(last + rng.gen_range(0.2..2.0));
        }
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..3.0)).collect();
        let c = cartesian_to_conical(&x, &a).unwrap();
        let y = conical_to_cartesian(&c, &a, None).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() <= 1e-12 * c.r, "{x:?} -> {y:?}");
        }
    }
}

#[test]
fn conical_degenerations_and_errors() {
    let a = cone();
    let c = ConicalCoords {
        r: 1.0,
        s: vec![4.0 / 3.0, 2.0],
    };
    let x = conical_to_cartesian(&c, &a, None).unwrap();
    assert_eq!(x[1], 0.0);
    let bad = ConicalCoords {
        r: 1.0,
        s: vec![2.0, 3.0],
    };
    assert!(matches!(
        conical_to_cartesian(&bad, &a, None),
        Err(Error::InterlacingViolation)
    ));
    assert!(cartesian_to_conical(&[1.0, -1.0, 1.0], &a).is_err());
    let signed = conical_to_cartesian(
        &ConicalCoords {
            r: 2.0,
            s: vec![0.0, 2.0],
        },
        &a,
        Some(&[-1, 1, -1]),
    )
    .unwrap();
    assert!(signed[0] < 0.0 && signed[1] > 0.0 && signed[2] < 0.0);
}

#[test]
fn conical_factorisation_matches_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (eps, m) in [
        (vec![0u8, 1, 1], vec![2usize, 1]),
        (vec![1, 0, 0], vec![1, 3]),
        (vec![0, 0, 0], vec![0, 2]),
    ] {
        let h = harmonic_for(&cone(), &eps, &m, 1e-13).unwrap();
        for _ in 0..10 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..2.0)).collect();
            let c = cartesian_to_conical(&x, &cone()).unwrap();
            let direct = h.eval(&x);
            let factored = h.eval_conical(&c).unwrap();
            assert!(
                (direct - factored).abs() <= 1e-9 * direct.abs().max(1e-3),
                "{direct} vs {factored}"
            );
        }
    }
}

#[test]
fn gram_matrices() {
    let single = vec![harmonic_for(&cone(), &[0, 0, 0], &[1, 0], 1e-14).unwrap()];
    let g = sphere_gram(&single, 3).unwrap();
    assert!(g.entries[0][0] > 0.0);
    let five: Vec<_> = enumerate_indices(3, 5)
        .into_iter()
        .map(|(e, m)| harmonic_for(&cone(), &e, &m, 1e-13).unwrap())
        .collect();
    assert_eq!(five.len(), 11);
    let g = sphere_gram(&five, 12).unwrap();
    assert!(g.max_offdiag_ratio() <= 1e-10, "{}", g.max_offdiag_ratio());
    let mixed = vec![single[0].clone(), five[0].clone()];
    assert!(matches!(
        sphere_gram(&mixed, 6),
        Err(Error::MixedDegrees(2, 5))
    ));
}

#[test]
fn randomized_gram_in_four_dimensions() {
    let a = [-2.0, -1.0, 1.0, 2.0];
    let hs: Vec<_> = enumerate_indices(4, 2)
        .into_iter()
        .map(|(e, m)| harmonic_for(&a, &e, &m, 1e-13).unwrap())
        .collect();
    let g = sphere_gram(&hs, 4).unwrap();
    let se = g.std_error.as_ref().unwrap();
    for i in 0..hs.len() {
        assert!(g.entries[i][i] > 0.0);
        for j in 0..hs.len() {
            if i != j {
                assert!(g.entries[i][j].abs() <= 6.0 * se[i][j] + 1e-3 * g.entries[i][i]);
            }
        }
    }
}

#[test]
fn json_export_carries_metadata() {
    let h = harmonic_for(&cone(), &[1, 0, 0], &[1, 1], 1e-13).unwrap();
    let j = h.to_json();
    assert_eq!(j["N"], 5);
    assert_eq!(j["d"], 3);
    assert_eq!(j["m"], serde_json::json!([1, 1]));
    assert!(j["C_norm"].is_number());
    assert_eq!(j["xi"].as_array().unwrap().len(), 2);
}

#[test]
fn rejects_mismatched_solution() {
    let h = harmonic_for(&cone(), &[0, 0, 0], &[1, 1], 1e-13).unwrap();
    let short = NivenSolution {
        xi: vec![0.5],
        ..h.xi.clone()
    };
    assert!(build_q(&h.problem, &short).is_err());
    let _ = solve(&h.problem, 1e-13).unwrap();
}
