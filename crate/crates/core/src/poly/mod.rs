//! Exact homogeneous polynomial algebra.
//!
//! Polynomials are sparse maps from exponent vectors to coefficients. The
//! monomial order is graded lexicographic with `x_1 > x_2 > … > x_d`; all
//! public iteration (and therefore matrix layout and JSON output) runs in
//! *descending* order, leading monomial first.

mod cone;
mod json;
mod linalg;
mod quadric;
mod taylor;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::Rational;

pub use cone::ConeParams;
pub use json::PolyJson;
pub use linalg::{EchelonForm, RationalMatrix};
pub use quadric::{
    dim_vanishing_space, quadric_map_matrix, solve_laplacian_division, Division, LinearMapMatrix,
};
pub use taylor::{recursion_residuals, taylor_recursion, OperatorSeries};

/// Exponent vector of a monomial, ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn quotient(&self, divisor: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&divisor.0).map(|(a, b)| a - b).collect())
    }

    /// All monomials of total degree `degree` in `dim` variables, descending.
    pub fn all_of_degree(dim: usize, degree: u32) -> Vec<Monomial> {
        fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if prefix.len() + 1 == dim {
                prefix.push(left);
                out.push(Monomial(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=left).rev() {
                prefix.push(e);
                rec(dim, left - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if dim == 0 {
            return out;
        }
        rec(dim, degree, &mut Vec::with_capacity(dim), &mut out);
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^{:?}", self.0)
    }
}

/// Coefficient ring for [`HomogeneousPoly`].
///
/// Implemented for exact [`Rational`]s and for `f64`; the float
/// implementation sums with Neumaier compensation.
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact value as a rational (floats are dyadic rationals).
    fn to_rational(&self) -> Rational;

    fn sum(items: Vec<Self>) -> Self {
        items.iter().fold(Self::zero(), |acc, x| acc.add(x))
    }
}

impl Coeff for Rational {
    fn zero() -> Self {
        Rational::new()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from(v)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
    fn add(&self, rhs: &Self) -> Self {
        Rational::from(self + rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Rational::from(self - rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Rational::from(self * rhs)
    }
    fn div(&self, rhs: &Self) -> Self {
        Rational::from(self / rhs)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Rational {
        Rational::from_f64(*self).expect("finite coefficient")
    }
    fn sum(items: Vec<Self>) -> Self {
        neumaier_sum(items)
    }
}

/// Compensated summation (Neumaier's variant of Kahan).
pub fn neumaier_sum(items: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in items {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Homogeneous polynomial in `dim` variables of fixed total degree.
///
/// Zero coefficients are never stored. The zero polynomial keeps a nominal
/// degree and may be added to a polynomial of any degree.
#[derive(Clone)]
pub struct HomogeneousPoly<C: Coeff = Rational> {
    dim: usize,
    degree: u32,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> HomogeneousPoly<C> {
    pub fn zero(dim: usize, degree: u32) -> Self {
        HomogeneousPoly {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        let mut p = Self::zero(dim, 0);
        p.insert(Monomial(vec![0; dim]), c);
        p
    }

    pub fn monomial(exps: Vec<u32>, c: C) -> Self {
        let mono = Monomial(exps);
        let mut p = Self::zero(mono.dim(), mono.degree());
        p.insert(mono, c);
        p
    }

    /// The coordinate function `x_j` (0-based).
    pub fn var(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        Self::monomial(e, C::from_i64(1))
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated monomials. Every exponent vector must have length `dim` and
    /// total degree `degree`.
    pub fn from_terms(
        dim: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, C)>,
    ) -> crate::Result<Self> {
        let mut p = Self::zero(dim, degree);
        for (exps, c) in terms {
            if exps.len() != dim {
                return Err(crate::Error::InvalidInput(format!(
                    "exponent vector {exps:?} has length {} (expected {dim})",
                    exps.len()
                )));
            }
            let mono = Monomial(exps);
            if mono.degree() != degree {
                return Err(crate::Error::InvalidInput(format!(
                    "monomial {mono:?} has degree {} (expected {degree})",
                    mono.degree()
                )));
            }
            p.accumulate(mono, c);
        }
        Ok(p)
    }

    fn insert(&mut self, mono: Monomial, c: C) {
        if c.is_zero() {
            self.terms.remove(&mono);
        } else {
            self.terms.insert(mono, c);
        }
    }

    fn accumulate(&mut self, mono: Monomial, c: C) {
        let next = match self.terms.get(&mono) {
            Some(old) => old.add(&c),
            None => c,
        };
        self.insert(mono, next);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        if c.is_zero() {
            return out;
        }
        for (m, v) in &self.terms {
            out.insert(m.clone(), v.mul(c));
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> HomogeneousPoly<D> {
        let mut out = HomogeneousPoly::zero(self.dim, self.degree);
        for (m, v) in &self.terms {
            out.insert(m.clone(), f(v));
        }
        out
    }

    fn check_compatible(&self, other: &Self) -> u32 {
        assert_eq!(
            self.dim, other.dim,
            "polynomials live in different dimensions"
        );
        if self.is_zero() {
            other.degree
        } else if other.is_zero() || self.degree == other.degree {
            self.degree
        } else {
            panic!(
                "adding homogeneous polynomials of degrees {} and {}",
                self.degree, other.degree
            );
        }
    }

    fn combine(&self, other: &Self, sub: bool) -> Self {
        let degree = self.check_compatible(other);
        let mut out = Self {
            dim: self.dim,
            degree,
            terms: self.terms.clone(),
        };
        for (m, v) in &other.terms {
            let v = if sub { v.neg() } else { v.clone() };
            out.accumulate(m.clone(), v);
        }
        out
    }

    /// Product; float coefficients are accumulated with compensated summation.
    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(
            self.dim, other.dim,
            "polynomials live in different dimensions"
        );
        let mut buckets: BTreeMap<Monomial, Vec<C>> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                buckets.entry(ma.times(mb)).or_default().push(ca.mul(cb));
            }
        }
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        for (m, items) in buckets {
            out.insert(m, C::sum(items));
        }
        out
    }

    /// `∂/∂x_j` (0-based variable index).
    pub fn partial(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim, self.degree.saturating_sub(1));
        for (m, v) in &self.terms {
            let e = m.0[j];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[j] -= 1;
            out.accumulate(Monomial(exps), v.mul(&C::from_i64(e as i64)));
        }
        out
    }

    pub fn second_partial(&self, j: usize, k: usize) -> Self {
        self.partial(j).partial(k)
    }

    /// `Δp`; has degree `max(N − 2, 0)`.
    pub fn laplacian(&self) -> Self {
        let mut buckets: BTreeMap<Monomial, Vec<C>> = BTreeMap::new();
        for (m, v) in &self.terms {
            for i in 0..self.dim {
                let e = m.0[i];
                if e < 2 {
                    continue;
                }
                let mut exps = m.0.clone();
                exps[i] -= 2;
                buckets
                    .entry(Monomial(exps))
                    .or_default()
                    .push(v.mul(&C::from_i64((e * (e - 1)) as i64)));
            }
        }
        let mut out = Self::zero(self.dim, self.degree.saturating_sub(2));
        for (m, items) in buckets {
            out.insert(m, C::sum(items));
        }
        out
    }

    /// `Σ_α |c_α|·|Δ x^α|`-style scale: the Laplacian computed with absolute
    /// values, against which float Laplacian residuals are measured.
    pub fn laplacian_magnitude(&self) -> f64 {
        let mut buckets: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (m, v) in &self.terms {
            for i in 0..self.dim {
                let e = m.0[i];
                if e < 2 {
                    continue;
                }
                let mut exps = m.0.clone();
                exps[i] -= 2;
                *buckets.entry(Monomial(exps)).or_default() +=
                    v.to_f64().abs() * (e * (e - 1)) as f64;
            }
        }
        buckets.values().copied().fold(0.0, f64::max)
    }

    /// Substitutes `x_j ↦ −x_j`.
    pub fn reflect(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (m, v) in &self.terms {
            let c = if m.0[j] % 2 == 1 { v.neg() } else { v.clone() };
            out.insert(m.clone(), c);
        }
        out
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        neumaier_sum(self.terms.iter().map(|(m, c)| {
            m.0.iter()
                .zip(x)
                .fold(c.to_f64(), |acc, (&e, &xi)| acc * xi.powi(e as i32))
        }))
    }

    /// Division by a single polynomial with graded-lex leading terms.
    ///
    /// Returns `(quotient, remainder)`. For a single divisor the remainder is
    /// zero exactly when the divisor divides `self`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert_eq!(
            self.dim, divisor.dim,
            "polynomials live in different dimensions"
        );
        let (lead_m, lead_c) = divisor
            .leading_term()
            .map(|(m, c)| (m.clone(), c.clone()))
            .expect("division by the zero polynomial");
        let qdeg = self.degree.saturating_sub(divisor.degree);
        let mut quotient = Self::zero(self.dim, qdeg);
        let mut remainder = Self::zero(self.dim, self.degree);
        let mut work = self.clone();
        while let Some((m, c)) = work.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            if lead_m.divides(&m) {
                let qm = m.quotient(&lead_m);
                let qc = c.div(&lead_c);
                let mut step = Self::zero(self.dim, qm.degree());
                step.insert(qm.clone(), qc.clone());
                work = work.combine(&divisor.product(&step), true);
                // The leading monomial must cancel exactly; for floats force it.
                work.terms.remove(&m);
                quotient.accumulate(qm, qc);
            } else {
                work.terms.remove(&m);
                remainder.accumulate(m, c);
            }
        }
        (quotient, remainder)
    }
}

impl HomogeneousPoly<Rational> {
    /// `K_a(x) = Σ_j x_j² / a_j` for the cone parameters `a`.
    pub fn quadric(a: &[Rational]) -> Self {
        let d = a.len();
        let terms = (0..d).map(|j| {
            let mut e = vec![0; d];
            e[j] = 2;
            (e, Rational::from(a[j].recip_ref()))
        });
        Self::from_terms(d, 2, terms).expect("well-formed quadric")
    }

    pub fn to_f64(&self) -> HomogeneousPoly<f64> {
        self.map_coeffs(|c| c.to_f64())
    }
}

/// Zero polynomials compare equal regardless of their nominal degree.
impl<C: Coeff> PartialEq for HomogeneousPoly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.terms == other.terms
            && (self.degree == other.degree || self.terms.is_empty())
    }
}

impl<C: Coeff> fmt::Debug for HomogeneousPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c:?})")?;
            for (i, &e) in m.exps().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "·x{}", i + 1)?,
                    _ => write!(f, "·x{}^{e}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}

impl<C: Coeff> Add for &HomogeneousPoly<C> {
    type Output = HomogeneousPoly<C>;
    fn add(self, rhs: Self) -> HomogeneousPoly<C> {
        self.combine(rhs, false)
    }
}

impl<C: Coeff> Sub for &HomogeneousPoly<C> {
    type Output = HomogeneousPoly<C>;
    fn sub(self, rhs: Self) -> HomogeneousPoly<C> {
        self.combine(rhs, true)
    }
}

impl<C: Coeff> Mul for &HomogeneousPoly<C> {
    type Output = HomogeneousPoly<C>;
    fn mul(self, rhs: Self) -> HomogeneousPoly<C> {
        self.product(rhs)
    }
}

impl<C: Coeff> Neg for &HomogeneousPoly<C> {
    type Output = HomogeneousPoly<C>;
    fn neg(self) -> HomogeneousPoly<C> {
        self.map_coeffs(|c| c.neg())
    }
}
