//! Conical harmonics `Q_{ε,m}(x) = x^ε · Π_k K_{ξ_k}(x)` with
//! `K_ξ(x) = Σ_j x_j²/(ξ − a_j)` and `ξ` a solution of Niven's equations.

mod coords;
mod gram;

use rug::Rational;
use serde::Serialize;

use crate::niven::{solve, NivenProblem, NivenSolution};
use crate::poly::{Coeff, PolyJson};
use crate::{ConeParams, Error, HomogeneousPoly, Result};

pub use coords::{cartesian_to_conical, conical_to_cartesian, ConicalCoords};
pub use gram::{sphere_gram, GramMatrix};

/// Expanded conical harmonic together with the data it was built from.
#[derive(Clone, Debug)]
pub struct ConicHarmonic {
    pub problem: NivenProblem,
    pub xi: NivenSolution,
    pub expanded: HomogeneousPoly<f64>,
    /// `(−1)^{n(d−1)} Π_{k,j} (ξ_k − a_j)⁻¹`, the constant in front of
    /// `x^ε r^{2n} Π_j P(s_j)` in conical coordinates.
    pub c_norm: f64,
    /// Coefficients of the monic `P(τ) = Π_k (τ − ξ_k)`, lowest degree first.
    pub p_factor: Vec<f64>,
}

fn confocal_quadric<C: Coeff>(a: &[C], xi: &C) -> HomogeneousPoly<C> {
    let d = a.len();
    HomogeneousPoly::from_terms(
        d,
        2,
        (0..d).map(|j| {
            let mut e = vec![0; d];
            e[j] = 2;
            (e, C::from_i64(1).div(&xi.sub(&a[j])))
        }),
    )
    .expect("well-formed quadric")
}

fn coordinate_monomial<C: Coeff>(eps: &[u8]) -> HomogeneousPoly<C> {
    HomogeneousPoly::monomial(eps.iter().map(|&e| e as u32).collect(), C::from_i64(1))
}

/// `x^ε · Π_k K_{ξ_k}` for any coefficient type.
pub fn expand<C: Coeff>(a: &[C], eps: &[u8], xi: &[C]) -> HomogeneousPoly<C> {
    xi.iter().fold(coordinate_monomial(eps), |acc, x| {
        acc.product(&confocal_quadric(a, x))
    })
}

/// Builds `Q_{ε,m}` from a solved problem with standard weights.
pub fn build_q(problem: &NivenProblem, xi: &NivenSolution) -> Result<ConicHarmonic> {
    let eps = problem
        .eps()
        .ok_or_else(|| Error::InvalidInput("harmonics need 0/1 exponents ε".into()))?;
    let a = problem.a();
    if xi.xi.len() != problem.n() {
        return Err(Error::InvalidInput(
            "solution does not match the problem".into(),
        ));
    }
    if xi.xi.iter().any(|x| a.contains(x)) {
        return Err(Error::DomainViolation("ξ_k coincides with some a_j".into()));
    }
    let n = problem.n();
    let d = problem.dim();
    let mut c_norm = if (n * (d - 1)) % 2 == 0 { 1.0 } else { -1.0 };
    for x in &xi.xi {
        for aj in a {
            c_norm /= x - aj;
        }
    }
    let mut p_factor = vec![1.0];
    for x in &xi.xi {
        let mut next = vec![0.0; p_factor.len() + 1];
        for (i, c) in p_factor.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * x;
        }
        p_factor = next;
    }
    Ok(ConicHarmonic {
        problem: problem.clone(),
        xi: xi.clone(),
        expanded: expand(a, eps, &xi.xi),
        c_norm,
        p_factor,
    })
}

/// Solves Niven's equations for `(ε, m)` at `a` and builds the harmonic.
pub fn harmonic_for(a: &[f64], eps: &[u8], m: &[usize], tol: f64) -> Result<ConicHarmonic> {
    let problem = NivenProblem::new(a.to_vec(), eps.to_vec(), m.to_vec())?;
    let sol = solve(&problem, tol)?;
    build_q(&problem, &sol)
}

impl ConicHarmonic {
    pub fn degree(&self) -> u32 {
        self.expanded.degree()
    }

    pub fn eps(&self) -> &[u8] {
        self.problem.eps().expect("built from a standard problem")
    }

    /// The bracket `Σ_j (1+2ε_j)/(ξ_k−a_j) + Σ_{ℓ≠k} 4/(ξ_k−ξ_ℓ)` for each `k`.
    pub fn brackets(&self) -> Result<Vec<f64>> {
        self.problem.residual(&self.xi.xi)
    }

    /// `ΔQ` assembled as `2 Σ_k bracket_k · Q/K_{ξ_k}`.
    pub fn laplacian_from_brackets(&self) -> Result<HomogeneousPoly<f64>> {
        let brackets = self.brackets()?;
        let a = self.problem.a();
        let xi = &self.xi.xi;
        let d = self.problem.dim();
        let mut out = HomogeneousPoly::zero(d, self.degree().saturating_sub(2));
        for (k, b) in brackets.iter().enumerate() {
            let others: Vec<f64> = xi
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != k)
                .map(|(_, x)| *x)
                .collect();
            out = &out + &expand(a, self.eps(), &others).scale(&(2.0 * b));
        }
        Ok(out)
    }

    /// `‖ΔQ‖_∞ / ‖|Δ|Q‖_∞`, the Laplacian measured against the size of the
    /// terms that cancel in it.
    pub fn laplacian_residual(&self) -> f64 {
        relative_to(
            &self.expanded.laplacian(),
            self.expanded.laplacian_magnitude(),
        )
    }

    /// Largest coefficient gap between the direct Laplacian and the bracket
    /// form, relative to the Laplacian's term scale.
    pub fn laplacian_agreement(&self) -> Result<f64> {
        let direct = self.expanded.laplacian();
        let via = self.laplacian_from_brackets()?;
        Ok(relative_to(
            &(&direct - &via),
            self.expanded.laplacian_magnitude(),
        ))
    }

    /// `Q(−x_j) = (−1)^{ε_j} Q(x)` coefficientwise, for every `j`.
    pub fn has_parity(&self) -> bool {
        self.eps().iter().enumerate().all(|(j, &e)| {
            let r = self.expanded.reflect(j);
            if e == 1 {
                r == -&self.expanded
            } else {
                r == self.expanded
            }
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.expanded.eval_f64(x)
    }

    /// `x^ε r^{2n} C Π_j P(s_j)` at a point given in conical coordinates,
    /// with `x^ε` taken from the positive orthant.
    pub fn eval_conical(&self, coords: &ConicalCoords) -> Result<f64> {
        let x = conical_to_cartesian(coords, self.problem.a(), None)?;
        let lin: f64 = self
            .eps()
            .iter()
            .zip(&x)
            .map(|(&e, v)| if e == 1 { *v } else { 1.0 })
            .product();
        let p = |s: f64| self.p_factor.iter().rev().fold(0.0, |acc, c| acc * s + c);
        let prod: f64 = coords.s.iter().map(|&s| p(s)).product();
        Ok(lin * coords.r.powi(2 * self.problem.n() as i32) * self.c_norm * prod)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Out<'a> {
            #[serde(flatten)]
            poly: PolyJson,
            epsilon: &'a [u8],
            m: &'a [usize],
            xi: &'a [f64],
            #[serde(rename = "C_norm")]
            c_norm: f64,
        }
        serde_json::to_value(Out {
            poly: PolyJson::from(&self.expanded),
            epsilon: self.eps(),
            m: self.problem.m(),
            xi: &self.xi.xi,
            c_norm: self.c_norm,
        })
        .expect("plain data serializes")
    }
}

fn relative_to(p: &HomogeneousPoly<f64>, scale: f64) -> f64 {
    let top = p.max_abs_coeff();
    if top == 0.0 {
        0.0
    } else {
        top / scale
    }
}

/// Every `(ε, m)` with `2|m| + |ε| = degree` in dimension `d`.
pub fn enumerate_indices(d: usize, degree: usize) -> Vec<(Vec<u8>, Vec<usize>)> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << d) {
        let eps: Vec<u8> = (0..d).map(|j| ((mask >> j) & 1) as u8).collect();
        let weight = mask.count_ones() as usize;
        if weight > degree || (degree - weight) % 2 == 1 {
            continue;
        }
        for m in compositions((degree - weight) / 2, d - 1) {
            out.push((eps.clone(), m));
        }
    }
    out
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

/// Dimension of the space of degree-`N` spherical harmonics in `d` variables.
pub fn spherical_harmonic_dim(d: usize, degree: usize) -> usize {
    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    let total = binom(degree + d - 1, d - 1);
    if degree < 2 {
        total
    } else {
        total - binom(degree + d - 3, d - 1)
    }
}

/// Best rational approximation with denominator at most `max_den`.
fn rationalize(x: f64, max_den: u64) -> Rational {
    let (mut h0, mut h1) = (Rational::from(0), Rational::from(1));
    let (mut k0, mut k1) = (Rational::from(1), Rational::from(0));
    let mut rest = Rational::from_f64(x).unwrap_or_default();
    for _ in 0..64 {
        let a = Rational::from(rest.floor_ref());
        let h2 = Rational::from(&a * &h1) + &h0;
        let k2 = Rational::from(&a * &k1) + &k0;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rest - a;
        if frac.cmp0().is_eq() {
            break;
        }
        rest = frac.recip();
    }
    h1 / k1
}

/// Recovers an exactly rational solution from a float one, if there is one
/// with small denominators. The candidate is verified in exact arithmetic.
pub fn rational_solution(a: &ConeParams, eps: &[u8], xi: &[f64]) -> Option<Vec<Rational>> {
    let cand: Vec<Rational> = xi.iter().map(|&x| rationalize(x, 1 << 20)).collect();
    let av = a.values();
    let ok = (0..cand.len()).all(|k| {
        let mut s = Rational::new();
        for (aj, &e) in av.iter().zip(eps) {
            let diff = Rational::from(&cand[k] - aj);
            if diff.cmp0().is_eq() {
                return false;
            }
            s += Rational::from(1 + 2 * e as i64) / diff;
        }
        for (l, y) in cand.iter().enumerate() {
            if l != k {
                let diff = Rational::from(&cand[k] - y);
                if diff.cmp0().is_eq() {
                    return false;
                }
                s += Rational::from(4) / diff;
            }
        }
        s.cmp0().is_eq()
    });
    ok.then_some(cand)
}

/// Exact `Q_{ε,m}` for a rational solution.
pub fn expand_exact(a: &ConeParams, eps: &[u8], xi: &[Rational]) -> HomogeneousPoly<Rational> {
    expand(a.values(), eps, xi)
}

#[cfg(test)]
mod tests;
