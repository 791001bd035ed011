use std::collections::BTreeMap;

use rug::Rational;

use super::{solve_laplacian_division, ConeParams, Division, HomogeneousPoly};
use crate::{Error, Result};

/// Homogeneous parts of the coefficients of a second-order operator
/// `Σ A_jk ∂_j∂_k + Σ B_j ∂_j + C` whose principal part is the identity at 0.
///
/// `A_jk = δ_jk + Σ_{ℓ≥1} a_{jk;ℓ}`, `B_j = Σ_{ℓ≥0} b_{j;ℓ}`, `C = Σ_{ℓ≥0} c_ℓ`,
/// where each part of index `ℓ` is homogeneous of degree `ℓ`. Missing parts
/// are zero.
#[derive(Clone, Debug, Default)]
pub struct OperatorSeries {
    dim: usize,
    second: BTreeMap<(u32, usize, usize), HomogeneousPoly>,
    first: BTreeMap<(u32, usize), HomogeneousPoly>,
    zeroth: BTreeMap<u32, HomogeneousPoly>,
}

impl OperatorSeries {
    /// The flat Laplacian: no perturbation terms at all.
    pub fn laplacian(dim: usize) -> Self {
        OperatorSeries {
            dim,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, order: u32, p: &HomogeneousPoly) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::InvalidInput(format!(
                "coefficient has {} variables, operator has {}",
                p.dim(),
                self.dim
            )));
        }
        if !p.is_zero() && p.degree() != order {
            return Err(Error::InvalidInput(format!(
                "coefficient of order {order} has degree {}",
                p.degree()
            )));
        }
        Ok(())
    }

    /// Sets `a_{jk;order}` (0-based `j`, `k`; `order ≥ 1`).
    pub fn with_second(
        mut self,
        order: u32,
        j: usize,
        k: usize,
        p: HomogeneousPoly,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput(
                "the order-0 principal part is fixed to the identity".into(),
            ));
        }
        if j >= self.dim || k >= self.dim {
            return Err(Error::InvalidInput(format!("index ({j},{k}) out of range")));
        }
        self.check(order, &p)?;
        self.second.insert((order, j, k), p);
        Ok(self)
    }

    /// Sets `b_{j;order}`.
    pub fn with_first(mut self, order: u32, j: usize, p: HomogeneousPoly) -> Result<Self> {
        if j >= self.dim {
            return Err(Error::InvalidInput(format!("index {j} out of range")));
        }
        self.check(order, &p)?;
        self.first.insert((order, j), p);
        Ok(self)
    }

    /// Sets `c_order`.
    pub fn with_zeroth(mut self, order: u32, p: HomogeneousPoly) -> Result<Self> {
        self.check(order, &p)?;
        self.zeroth.insert(order, p);
        Ok(self)
    }

    /// Degree-`ell` right-hand side of the recursion given `q_0 … q_{ell−1}`.
    fn rhs(&self, u: &HomogeneousPoly, qs: &[HomogeneousPoly], ell: u32) -> HomogeneousPoly {
        let mut acc = HomogeneousPoly::zero(self.dim, ell);
        if ell == 0 {
            return acc;
        }
        let uq = |i: u32| u * &qs[i as usize];
        for (&(order, j, k), coeff) in self.second.range((1, 0, 0)..=(ell, usize::MAX, usize::MAX))
        {
            let term = coeff * &uq(ell - order).second_partial(j, k);
            acc = &acc - &term;
        }
        for (&(order, j), coeff) in self.first.range((0, 0)..(ell, 0)) {
            let term = coeff * &uq(ell - order - 1).partial(j);
            acc = &acc - &term;
        }
        if ell >= 2 {
            for (&order, coeff) in self.zeroth.range(0..=ell - 2) {
                let term = coeff * &uq(ell - order - 2);
                acc = &acc - &term;
            }
        }
        acc
    }
}

fn corner_monomial(dim: usize) -> Vec<u32> {
    vec![1; dim]
}

/// Formal power-series solution `Q = Σ q_ℓ` of `L(u·Q) = 0` with `u = K_a`.
///
/// `q_0 = 0`, the free order-`d` part is fixed to `seed` (a multiple of
/// `x_1⋯x_d`), and every other `q_ℓ` is the unique solution of the
/// order-`ℓ` equation. Returns `q_0 … q_max_order`.
pub fn taylor_recursion(
    a: &ConeParams,
    series: &OperatorSeries,
    seed: &HomogeneousPoly,
    max_order: u32,
) -> Result<Vec<HomogeneousPoly>> {
    let d = a.dim();
    if series.dim() != d || seed.dim() != d {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    if !a.inverse_sum_zero() {
        return Err(Error::InvalidInput(format!(
            "cone {a} does not satisfy Σ 1/a_j = 0"
        )));
    }
    let corner = corner_monomial(d);
    let seed_ok = seed.is_zero()
        || (seed.len() == 1 && seed.leading_term().is_some_and(|(m, _)| m.exps() == corner));
    if !seed_ok {
        return Err(Error::InvalidInput(
            "seed must be a multiple of x_1⋯x_d".into(),
        ));
    }

    let u = a.quadric();
    let mut qs = vec![HomogeneousPoly::zero(d, 0)];
    for ell in 1..=max_order {
        let rhs = series.rhs(&u, &qs, ell);
        let q = match solve_laplacian_division(a, &rhs, ell + 2)? {
            Division::Unique(q) => q,
            Division::NonUnique {
                particular,
                nullspace,
            } => {
                if ell as usize != d || nullspace.len() != 1 {
                    return Err(Error::NonGenericCone {
                        order: ell,
                        nullity: nullspace.len(),
                    });
                }
                let kernel = &nullspace[0];
                let pivot = kernel.coeff(&corner);
                if pivot.cmp0().is_eq() {
                    return Err(Error::NonGenericCone {
                        order: ell,
                        nullity: 1,
                    });
                }
                let shift: Rational = particular.coeff(&corner) / pivot;
                let normalized = &particular - &kernel.scale(&shift);
                &normalized + seed
            }
        };
        qs.push(q);
    }
    Ok(qs)
}

/// `Δ(u·q_ℓ) − RHS_ℓ` for each order; all zero for a solution of the recursion.
pub fn recursion_residuals(
    a: &ConeParams,
    series: &OperatorSeries,
    qs: &[HomogeneousPoly],
) -> Vec<HomogeneousPoly> {
    let u = a.quadric();
    (0..qs.len() as u32)
        .map(|ell| {
            let lhs = (&u * &qs[ell as usize]).laplacian();
            let rhs = series.rhs(&u, qs, ell);
            &lhs - &rhs
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone() -> ConeParams {
        ConeParams::parse("-1,4/3,4").unwrap()
    }

    fn xyz() -> HomogeneousPoly {
        HomogeneousPoly::monomial(vec![1, 1, 1], Rational::from(1))
    }

    #[test]
    fn pure_laplacian_with_zero_seed_is_trivial() {
        let qs = taylor_recursion(
            &cone(),
            &OperatorSeries::laplacian(3),
            &HomogeneousPoly::zero(3, 3),
            7,
        )
        .unwrap();
        assert_eq!(qs.len(), 8);
        assert!(qs.iter().all(HomogeneousPoly::is_zero));
    }

    #[test]
    fn pure_laplacian_keeps_the_seed() {
        let qs = taylor_recursion(&cone(), &OperatorSeries::laplacian(3), &xyz(), 7).unwrap();
        for (ell, q) in qs.iter().enumerate() {
            if ell == 3 {
                assert_eq!(*q, xyz());
            } else {
                assert!(q.is_zero(), "q_{ell} = {q:?}");
            }
        }
    }

    /// Degree-`ell` part of `L(u·Σ q)`, expanded directly from the operator.
    fn operator_component(
        u: &HomogeneousPoly,
        coeffs: &[(u32, HomogeneousPoly)],
        qs: &[HomogeneousPoly],
        ell: u32,
    ) -> HomogeneousPoly {
        let mut acc = HomogeneousPoly::zero(3, ell);
        for (i, q) in qs.iter().enumerate() {
            let v = u * q;
            if i as u32 == ell {
                acc = &acc + &v.laplacian();
            }
            for (order, c) in coeffs {
                if order + i as u32 + 2 == ell {
                    acc = &acc + &(c * &v);
                }
            }
        }
        acc
    }

    #[test]
    fn helmholtz_perturbation_satisfies_the_operator() {
        let a = cone();
        let one = HomogeneousPoly::constant(3, Rational::from(1));
        let series = OperatorSeries::laplacian(3)
            .with_zeroth(0, one.clone())
            .unwrap();
        let qs = taylor_recursion(&a, &series, &xyz(), 7).unwrap();
        assert!(!qs[5].is_zero() && !qs[7].is_zero());
        for ell in [1, 2, 4, 6] {
            assert!(qs[ell].is_zero());
        }
        assert!(recursion_residuals(&a, &series, &qs)
            .iter()
            .all(HomogeneousPoly::is_zero));
        let u = a.quadric();
        for ell in 0..=7 {
            assert!(operator_component(&u, &[(0, one.clone())], &qs, ell).is_zero());
        }
    }

    #[test]
    fn mixed_perturbation_has_zero_residual() {
        let a = cone();
        let x = |j| HomogeneousPoly::var(3, j);
        let series = OperatorSeries::laplacian(3)
            .with_second(1, 0, 1, x(2))
            .unwrap()
            .with_second(1, 1, 0, x(2))
            .unwrap()
            .with_first(0, 2, HomogeneousPoly::constant(3, Rational::from((1, 2))))
            .unwrap()
            .with_zeroth(1, x(0))
            .unwrap();
        let qs = taylor_recursion(&a, &series, &xyz(), 7).unwrap();
        assert!(recursion_residuals(&a, &series, &qs)
            .iter()
            .all(HomogeneousPoly::is_zero));
    }

    #[test]
    fn rejects_bad_seed_and_degree() {
        let a = cone();
        let bad = HomogeneousPoly::monomial(vec![3, 0, 0], Rational::from(1));
        assert!(taylor_recursion(&a, &OperatorSeries::laplacian(3), &bad, 4).is_err());
        assert!(OperatorSeries::laplacian(3)
            .with_zeroth(2, HomogeneousPoly::var(3, 0))
            .is_err());
    }

    #[test]
    fn non_generic_cone_is_reported() {
        let a = ConeParams::parse("1,1,1,-1/3").unwrap();
        let seed = HomogeneousPoly::monomial(vec![1, 1, 1, 1], Rational::from(1));
        let err = taylor_recursion(&a, &OperatorSeries::laplacian(4), &seed, 8).unwrap_err();
        assert!(matches!(err, Error::NonGenericCone { .. }), "{err:?}");
    }
}
