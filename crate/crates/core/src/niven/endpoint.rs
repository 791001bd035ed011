//! Endpoint data of the family `a(t) = (−1, 2/(1+t), 2/(1−t))`.
//!
//! At `t → 0` the cone becomes round and the first `m₁` components approach
//! `−1 + 3ζ²` for zeros `ζ` of an associated Legendre polynomial. At `t → 1`
//! the first `m₁` components converge to a two-parameter problem on `(−1, 1)`
//! with an explicit solution, and the rest blow up like `1/(1−t)`.

use rug::Rational;
use serde::Serialize;

use super::{inf_norm, NivenProblem};
use crate::legendre::{zeros_exact_bits, LegendreSpec};
use crate::{Error, Real, Result};

fn split(eps: &[u8], m: &[usize]) -> Result<([usize; 3], [usize; 2])> {
    if eps.len() != 3 || m.len() != 2 || eps.iter().any(|&e| e > 1) {
        return Err(Error::InvalidInput(
            "the curve family needs ε ∈ {0,1}³ and m of length 2".into(),
        ));
    }
    Ok((
        [eps[0] as usize, eps[1] as usize, eps[2] as usize],
        [m[0], m[1]],
    ))
}

/// Solution of the problem on `a = (−1, 1)` with weights `(1+2e₁, 1+2e₂)`:
/// `ξ_k = −cos((2k−1+e₁)π/(2n+e₁+e₂))`.
pub fn two_band_closed_form<R: Real>(n: usize, e1: u8, e2: u8) -> Vec<R> {
    let den = (2 * n + e1 as usize + e2 as usize) as i64;
    (1..=n)
        .map(|k| {
            let num = (2 * k - 1 + e1 as usize) as i64;
            -(R::from_i64(num) * R::pi() / R::from_i64(den)).cos()
        })
        .collect()
}

fn zero_midpoints(ell: usize, order: usize, needed: usize) -> Result<Vec<f64>> {
    let spec = LegendreSpec::new(ell as u32, order as u32)?;
    let zeros = zeros_exact_bits(spec, 64)?;
    if zeros.len() < needed {
        return Err(Error::IndexOutOfRange {
            index: needed,
            available: zeros.len(),
        });
    }
    Ok(zeros.iter().map(|z| z.midpoint_f64()).collect())
}

/// Leading behaviour near `t = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct T0Prediction {
    /// `ξ_k(0) = −1 + 3ζ_k²` for `k ≤ m₁`.
    pub limits: Vec<f64>,
    /// `c_k` in `ξ_k ≈ 2 + c_k·t` for `k > m₁`, phase offset `ε₂`.
    pub slopes: Vec<f64>,
    /// Same with the phase offset `ε₃`.
    pub slopes_alt: Vec<f64>,
}

impl T0Prediction {
    pub fn predict(&self, t: f64) -> Vec<f64> {
        let mut v = self.limits.clone();
        v.extend(self.slopes.iter().map(|c| 2.0 + c * t));
        v
    }
}

/// Limits as `t → 0` along the cone family.
pub fn asymptotic_t0(eps: &[u8], m: &[usize]) -> Result<T0Prediction> {
    let ([e1, e2, e3], [m1, m2]) = split(eps, m)?;
    let degree = 2 * (m1 + m2) + e1 + e2 + e3;
    let limits = if m1 == 0 {
        Vec::new()
    } else {
        zero_midpoints(degree, 2 * m2 + e2 + e3, m1)?[..m1]
            .iter()
            .map(|z| -1.0 + 3.0 * z * z)
            .collect()
    };
    let den = (2 * m2 + e2 + e3) as f64;
    let slope = |offset: usize| -> Vec<f64> {
        (1..=m2)
            .map(|i| -2.0 * ((2 * i - 1 + offset) as f64 * std::f64::consts::PI / den).cos())
            .collect()
    };
    Ok(T0Prediction {
        limits,
        slopes: slope(e2),
        slopes_alt: slope(e3),
    })
}

/// Leading behaviour near `t = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct T1Prediction {
    /// `ξ_k(1)` for `k ≤ m₁`.
    pub limits: Vec<f64>,
    /// Residues `r_k` in `ξ_k ≈ r_k/(1−t)` for `k > m₁`.
    pub residues: Vec<f64>,
}

impl T1Prediction {
    pub fn predict(&self, t: f64) -> Vec<f64> {
        let mut v = self.limits.clone();
        v.extend(self.residues.iter().map(|r| r / (1.0 - t)));
        v
    }
}

/// Limits and pole residues as `t → 1` along the cone family.
pub fn asymptotic_t1(eps: &[u8], m: &[usize]) -> Result<T1Prediction> {
    let ([e1, e2, e3], [m1, m2]) = split(eps, m)?;
    let degree = 2 * (m1 + m2) + e1 + e2 + e3;
    let residues = if m2 == 0 {
        Vec::new()
    } else {
        let z = zero_midpoints(degree, 2 * m1 + e1 + e2, m2)?;
        // ξ_k pairs with the (|m|−k+1)-th zero, so the residues ascend.
        (0..m2).rev().map(|i| 2.0 * (1.0 - z[i] * z[i])).collect()
    };
    Ok(T1Prediction {
        limits: two_band_closed_form(m1, e1 as u8, e2 as u8),
        residues,
    })
}

/// The constant `K` in the derivative of `ξ_k` at `t = 1`, `k ≤ m₁`.
pub fn derivative_constant(eps: &[u8], m: &[usize]) -> Result<Rational> {
    let ([e1, e2, e3], [m1, m2]) = split(eps, m)?;
    let q = |x: usize| Rational::from(x as u64);
    let num = q(2 * m2 + e3) * q(4 * m1 + 2 * m2 + 2 * e1 + 2 * e2 + e3 + 1);
    let den = q(2 * (2 * m1 + e1 + e2 + 1));
    Ok(Rational::from((1, 2)) + num / den)
}

/// `ξ'_k(1) = −(1+ξ_k(1))/4 + K(1−ξ_k(1)²)/(4m₁+4ε₁−2)` for `k ≤ m₁`.
pub fn derivative_at_t1(eps: &[u8], m: &[usize]) -> Result<Vec<f64>> {
    let ([e1, e2, _], [m1, _]) = split(eps, m)?;
    if e1 != e2 {
        return Err(Error::PreconditionViolation(
            "the derivative formula at t = 1 needs ε₁ = ε₂".into(),
        ));
    }
    if m1 == 0 {
        return Ok(Vec::new());
    }
    let k = derivative_constant(eps, m)?.to_f64();
    let den = (4 * m1 + 4 * e1) as f64 - 2.0;
    Ok(two_band_closed_form::<f64>(m1, e1 as u8, e2 as u8)
        .into_iter()
        .map(|x| -(1.0 + x) / 4.0 + k * (1.0 - x * x) / den)
        .collect())
}

/// For `ξ` solving `δ/(ξ_k−1) + δ/(ξ_k+1) + 4Σ_{ℓ≠k} 1/(ξ_k−ξ_ℓ) = 0`, checks
/// `A·v = ((ξ_k−1)⁻²)` and `A·w = 1` where `A` is the Hessian of that
/// system's potential, `v_k = (1+ξ_k)/(2δ)` and `w_k = (1−ξ_k²)/(4(n−1)+2δ)`.
/// Returns the two sup-norm residuals.
pub fn miracle_check<R: Real>(xi: &[R], delta: &R) -> Result<(R, R)> {
    let n = xi.len();
    if n == 0 {
        return Ok((R::zero(), R::zero()));
    }
    let problem = NivenProblem::with_weights(
        vec![R::from_i64(-1), R::from_i64(1)],
        vec![delta.clone(), delta.clone()],
        vec![n],
    )?;
    let a = problem.potential(xi)?.hessian;
    let two = R::from_i64(2);
    let v: Vec<R> = xi
        .iter()
        .map(|x| (R::one() + x.clone()) / (two.clone() * delta.clone()))
        .collect();
    let w_den = R::from_i64(4 * (n as i64 - 1)) + two * delta.clone();
    let w: Vec<R> = xi
        .iter()
        .map(|x| (R::one() - x.clone().square()) / w_den.clone())
        .collect();
    let apply = |u: &[R]| -> Vec<R> {
        a.iter()
            .map(|row| {
                super::compensated_sum(
                    row.iter()
                        .zip(u)
                        .map(|(h, x)| h.clone() * x.clone())
                        .collect(),
                )
            })
            .collect()
    };
    let rv: Vec<R> = apply(&v)
        .into_iter()
        .zip(xi)
        .map(|(y, x)| y - R::one() / (x.clone() - R::one()).square())
        .collect();
    let rw: Vec<R> = apply(&w).into_iter().map(|y| y - R::one()).collect();
    Ok((inf_norm(&rv), inf_norm(&rw)))
}
