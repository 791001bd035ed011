use rug::Rational;

use super::{ConeParams, HomogeneousPoly, Monomial, RationalMatrix};
use crate::{Error, Result};

/// Matrix of `r ↦ Δ(K_a·r)` on homogeneous polynomials of degree `N − 2`.
///
/// Rows and columns are indexed by [`LinearMapMatrix::basis`], the degree
/// `N − 2` monomials in descending graded-lex order.
#[derive(Clone, Debug)]
pub struct LinearMapMatrix {
    degree: u32,
    basis: Vec<Monomial>,
    matrix: RationalMatrix,
}

impl LinearMapMatrix {
    /// Degree `N` of the products `K_a·r`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    fn coords(&self, p: &HomogeneousPoly) -> Vec<Rational> {
        self.basis.iter().map(|m| p.coeff(m.exps())).collect()
    }

    fn poly(&self, v: Vec<Rational>) -> HomogeneousPoly {
        let dim = self.basis.first().map_or(0, Monomial::dim);
        HomogeneousPoly::from_terms(
            dim,
            self.degree - 2,
            self.basis.iter().map(|m| m.exps().to_vec()).zip(v),
        )
        .expect("basis monomials have the right degree")
    }
}

pub fn quadric_map_matrix(a: &ConeParams, degree: u32) -> Result<LinearMapMatrix> {
    if degree < 2 {
        return Err(Error::DegreeTooSmall { degree, min: 2 });
    }
    let k = a.quadric();
    let basis = Monomial::all_of_degree(a.dim(), degree - 2);
    let n = basis.len();
    let index: std::collections::HashMap<&Monomial, usize> =
        basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut matrix = RationalMatrix::zeros(n, n);
    for (col, mono) in basis.iter().enumerate() {
        let r = HomogeneousPoly::monomial(mono.exps().to_vec(), Rational::from(1));
        let image = (&k * &r).laplacian();
        for (m, c) in image.terms() {
            matrix.set(index[m], col, c.clone());
        }
    }
    Ok(LinearMapMatrix {
        degree,
        basis,
        matrix,
    })
}

/// `dim V_N(C_a)`: the corank of `r ↦ Δ(K_a·r)`, computed exactly.
pub fn dim_vanishing_space(a: &ConeParams, degree: u32) -> usize {
    match quadric_map_matrix(a, degree) {
        Ok(m) => m.matrix.corank(),
        Err(_) => 0,
    }
}

/// Outcome of solving `Δ(K_a·q) = f`.
#[derive(Clone, Debug)]
pub enum Division {
    Unique(HomogeneousPoly),
    /// The map has a kernel; any kernel element may be added to `particular`.
    NonUnique {
        particular: HomogeneousPoly,
        nullspace: Vec<HomogeneousPoly>,
    },
}

impl Division {
    pub fn particular(&self) -> &HomogeneousPoly {
        match self {
            Division::Unique(q) => q,
            Division::NonUnique { particular, .. } => particular,
        }
    }

    pub fn nullity(&self) -> usize {
        match self {
            Division::Unique(_) => 0,
            Division::NonUnique { nullspace, .. } => nullspace.len(),
        }
    }
}

/// Solves `Δ(K_a·q) = f` for `q` of degree `N − 2`, where `f` has degree `N − 2`.
///
/// Returns [`Error::NoSolution`] when `f` is not in the image.
pub fn solve_laplacian_division(
    a: &ConeParams,
    f: &HomogeneousPoly,
    degree: u32,
) -> Result<Division> {
    let map = quadric_map_matrix(a, degree)?;
    if f.dim() != a.dim() {
        return Err(Error::InvalidInput(format!(
            "right-hand side has {} variables, cone has {}",
            f.dim(),
            a.dim()
        )));
    }
    if !f.is_zero() && f.degree() != degree - 2 {
        return Err(Error::InvalidInput(format!(
            "right-hand side has degree {} (expected {})",
            f.degree(),
            degree - 2
        )));
    }
    let b = map.coords(f);
    let ech = map.matrix.echelon();
    let x = map.matrix.solve_particular(&b).ok_or(Error::NoSolution)?;
    let particular = map.poly(x);
    if ech.rank() == map.size() {
        return Ok(Division::Unique(particular));
    }
    let nullspace = ech.nullspace().into_iter().map(|v| map.poly(v)).collect();
    Ok(Division::NonUnique {
        particular,
        nullspace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cone() -> ConeParams {
        ConeParams::parse("-1,4/3,4").unwrap()
    }

    #[test]
    fn constant_case_is_the_inverse_sum() {
        let m = quadric_map_matrix(&cone(), 2).unwrap();
        assert_eq!(m.size(), 1);
        assert!(m.matrix().get(0, 0).cmp0().is_eq());
        let generic = ConeParams::parse("1,2,3").unwrap();
        let m = quadric_map_matrix(&generic, 2).unwrap();
        assert_eq!(*m.matrix().get(0, 0), Rational::from((11, 3)));
    }

    #[test]
    fn rejects_low_degree() {
        assert!(matches!(
            quadric_map_matrix(&cone(), 1),
            Err(Error::DegreeTooSmall { .. })
        ));
        assert_eq!(dim_vanishing_space(&cone(), 1), 0);
    }

    #[test]
    fn matrix_entries_match_termwise_expansion() {
        // Δ(K·x^α) = Σ_j (1/a_j)·Δ x^{α+2e_j}, and Δx^β = Σ_i β_i(β_i−1) x^{β−2e_i}.
        let a = cone();
        let m = quadric_map_matrix(&a, 4).unwrap();
        assert_eq!(m.size(), 6);
        for (col, alpha) in m.basis().iter().enumerate() {
            let mut expect = vec![Rational::new(); m.size()];
            for j in 0..3 {
                let mut beta = alpha.exps().to_vec();
                beta[j] += 2;
                for i in 0..3 {
                    if beta[i] < 2 {
                        continue;
                    }
                    let mut gamma = beta.clone();
                    gamma[i] -= 2;
                    let row = m.basis().iter().position(|b| b.exps() == gamma).unwrap();
                    let c = Rational::from(beta[i] * (beta[i] - 1)) / &a.values()[j];
                    expect[row] += c;
                }
            }
            for (row, e) in expect.iter().enumerate() {
                assert_eq!(m.matrix().get(row, col), e, "entry ({row},{col})");
            }
        }
    }

    #[test]
    fn known_dimensions() {
        let a = cone();
        assert_eq!(dim_vanishing_space(&a, 2), 1);
        assert_eq!(dim_vanishing_space(&a, 3), 0);
        assert_eq!(dim_vanishing_space(&a, 4), 0);
        assert_eq!(dim_vanishing_space(&a, 5), 1);
        let m3 = quadric_map_matrix(&a, 3).unwrap();
        assert_eq!(m3.size(), 3);
        assert_eq!(m3.matrix().rank(), 3);
    }

    #[test]
    fn division_examples() {
        let a = cone();
        let zero = HomogeneousPoly::zero(3, 1);
        match solve_laplacian_division(&a, &zero, 3).unwrap() {
            Division::Unique(q) => assert!(q.is_zero()),
            other => panic!("expected unique, got {other:?}"),
        }
        let zero = HomogeneousPoly::zero(3, 0);
        let d = solve_laplacian_division(&a, &zero, 2).unwrap();
        assert_eq!(d.nullity(), 1);

        let x1 = HomogeneousPoly::var(3, 0);
        let f = (&a.quadric() * &x1).laplacian();
        match solve_laplacian_division(&a, &f, 3).unwrap() {
            Division::Unique(q) => assert_eq!(q, x1),
            other => panic!("expected unique, got {other:?}"),
        }
    }

    #[test]
    fn out_of_image_is_no_solution() {
        let a = cone();
        let f = HomogeneousPoly::constant(3, Rational::from(1));
        assert!(matches!(
            solve_laplacian_division(&a, &f, 2),
            Err(Error::NoSolution)
        ));
    }

    #[test]
    fn nullspace_elements_are_harmonic_multiples() {
        let a = cone();
        let zero = HomogeneousPoly::zero(3, 3);
        let d = solve_laplacian_division(&a, &zero, 5).unwrap();
        assert_eq!(d.nullity(), 1);
        if let Division::NonUnique { nullspace, .. } = d {
            for v in nullspace {
                assert!((&a.quadric() * &v).laplacian().is_zero());
            }
        }
    }

    #[test]
    fn degree_two_is_always_one_dimensional() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 3..=6 {
            let a = ConeParams::random_harmonic(d, &mut rng);
            assert_eq!(dim_vanishing_space(&a, 2), 1, "a = {a}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn corank_is_scale_invariant(seed in any::<u64>(), num in 1i64..20, den in 1i64..20, n in 2u32..=7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = ConeParams::random_harmonic(3, &mut rng);
            let scaled = a.rescale(&Rational::from((num, den))).unwrap();
            prop_assert_eq!(dim_vanishing_space(&a, n), dim_vanishing_space(&scaled, n));
        }
    }
}
