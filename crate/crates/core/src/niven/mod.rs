//! Niven's equations
//!
//! `R_k(ξ) = Σ_j w_j/(ξ_k − a_j) + Σ_{ℓ≠k} 4/(ξ_k − ξ_ℓ) = 0`, `w_j = 1 + 2ε_j`,
//!
//! solved as the minimisation of the convex barrier
//! `φ(ξ) = −Σ_k Σ_j w_j log|ξ_k − a_j| − 4 Σ_{k<ℓ} log|ξ_k − ξ_ℓ|`
//! over the ordered box `D_m`, in which `m_j` components lie in `(a_j, a_{j+1})`.
//! `∇φ = −R`, so the unique minimiser is the unique solution in `D_m`.

mod curve;
mod endpoint;

use serde::Serialize;

use crate::{Error, Real, Result};

pub use curve::{trace_curve, CurveTrace, RationalCurve, TraceSample, TraceSettings};
pub use endpoint::{
    asymptotic_t0, asymptotic_t1, derivative_at_t1, derivative_constant, miracle_check,
    two_band_closed_form, T0Prediction, T1Prediction,
};

/// Parameters `(a, w, m)` of one instance of Niven's equations.
#[derive(Clone, Debug)]
pub struct NivenProblem<R = f64> {
    a: Vec<R>,
    weights: Vec<R>,
    eps: Option<Vec<u8>>,
    m: Vec<usize>,
}

impl<R: Real> NivenProblem<R> {
    /// Standard problem with weights `1 + 2ε_j`.
    pub fn new(a: Vec<R>, eps: Vec<u8>, m: Vec<usize>) -> Result<Self> {
        if eps.len() != a.len() || eps.iter().any(|&e| e > 1) {
            return Err(Error::InvalidInput(format!(
                "ε must be a 0/1 vector of length {}",
                a.len()
            )));
        }
        let weights = eps.iter().map(|&e| R::from_i64(1 + 2 * e as i64)).collect();
        let mut p = Self::with_weights(a, weights, m)?;
        p.eps = Some(eps);
        Ok(p)
    }

    /// Problem with arbitrary positive weights in place of `1 + 2ε_j`.
    pub fn with_weights(a: Vec<R>, weights: Vec<R>, m: Vec<usize>) -> Result<Self> {
        let d = a.len();
        if d < 2 {
            return Err(Error::InvalidInput(
                "need at least two parameters a_j".into(),
            ));
        }
        if a.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("a must be strictly ascending".into()));
        }
        if weights.len() != d || weights.iter().any(|w| !(*w > R::zero())) {
            return Err(Error::InvalidInput(
                "weights must be positive, one per a_j".into(),
            ));
        }
        if m.len() != d - 1 {
            return Err(Error::InvalidInput(format!("m must have length {}", d - 1)));
        }
        Ok(NivenProblem {
            a,
            weights,
            eps: None,
            m,
        })
    }

    pub fn a(&self) -> &[R] {
        &self.a
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn eps(&self) -> Option<&[u8]> {
        self.eps.as_deref()
    }

    pub fn m(&self) -> &[usize] {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Number of unknowns `|m|`.
    pub fn n(&self) -> usize {
        self.m.iter().sum()
    }

    /// `2|m| + |ε|` (only meaningful for standard weights).
    pub fn degree(&self) -> usize {
        2 * self.n()
            + self
                .eps
                .as_ref()
                .map_or(0, |e| e.iter().map(|&x| x as usize).sum())
    }

    /// Interval index `j` such that `ξ_k ∈ (a_j, a_{j+1})` on `D_m`.
    pub fn bands(&self) -> Vec<usize> {
        self.m
            .iter()
            .enumerate()
            .flat_map(|(j, &c)| std::iter::repeat_n(j, c))
            .collect()
    }

    /// Same `(w, m)` on new parameters `a`.
    pub fn with_a(&self, a: Vec<R>) -> Result<Self> {
        let mut p = Self::with_weights(a, self.weights.clone(), self.m.clone())?;
        p.eps = self.eps.clone();
        Ok(p)
    }

    pub fn to_f64(&self) -> NivenProblem<f64> {
        NivenProblem {
            a: self.a.iter().map(R::to_f64).collect(),
            weights: self.weights.iter().map(R::to_f64).collect(),
            eps: self.eps.clone(),
            m: self.m.clone(),
        }
    }

    pub fn convert<S: Real>(&self) -> NivenProblem<S> {
        NivenProblem {
            a: self.a.iter().map(|x| S::from_f64(x.to_f64())).collect(),
            weights: self
                .weights
                .iter()
                .map(|x| S::from_f64(x.to_f64()))
                .collect(),
            eps: self.eps.clone(),
            m: self.m.clone(),
        }
    }

    /// Whether `ξ` lies in the open box `D_m`.
    pub fn in_domain(&self, xi: &[R]) -> bool {
        xi.len() == self.n()
            && self
                .bands()
                .iter()
                .zip(xi)
                .all(|(&j, x)| self.a[j] < *x && *x < self.a[j + 1])
            && xi.windows(2).all(|w| w[0] < w[1])
    }

    /// Per-band Chebyshev points, a deep interior starting point of `D_m`.
    pub fn chebyshev_start(&self) -> Vec<R> {
        let mut xi = Vec::with_capacity(self.n());
        for (j, &count) in self.m.iter().enumerate() {
            let mid = (self.a[j].clone() + self.a[j + 1].clone()) / R::from_i64(2);
            let half = (self.a[j + 1].clone() - self.a[j].clone()) / R::from_i64(2);
            for i in 1..=count {
                let angle = R::from_i64(2 * i as i64 - 1) * R::pi() / R::from_i64(2 * count as i64);
                xi.push(mid.clone() - half.clone() * angle.cos());
            }
        }
        xi
    }

    fn check_point(&self, xi: &[R]) -> Result<()> {
        if xi.len() != self.n() {
            return Err(Error::InvalidInput(format!(
                "ξ has {} components, expected {}",
                xi.len(),
                self.n()
            )));
        }
        for (k, x) in xi.iter().enumerate() {
            if self.a.iter().any(|a| a == x) {
                return Err(Error::DomainViolation(format!(
                    "ξ_{} coincides with some a_j",
                    k + 1
                )));
            }
            if xi[..k].iter().any(|y| y == x) {
                return Err(Error::DomainViolation(format!(
                    "ξ_{} repeats an earlier component",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    /// The residual vector `R(ξ)`.
    pub fn residual(&self, xi: &[R]) -> Result<Vec<R>> {
        self.check_point(xi)?;
        Ok(self.residual_unchecked(xi))
    }

    fn residual_unchecked(&self, xi: &[R]) -> Vec<R> {
        let four = R::from_i64(4);
        (0..xi.len())
            .map(|k| {
                let mut terms: Vec<R> = self
                    .a
                    .iter()
                    .zip(&self.weights)
                    .map(|(a, w)| w.clone() / (xi[k].clone() - a.clone()))
                    .collect();
                terms.extend(
                    (0..xi.len())
                        .filter(|&l| l != k)
                        .map(|l| four.clone() / (xi[k].clone() - xi[l].clone())),
                );
                compensated_sum(terms)
            })
            .collect()
    }

    /// `φ(ξ)`, `∇φ(ξ) = −R(ξ)` and the Hessian of `φ`.
    pub fn potential(&self, xi: &[R]) -> Result<Potential<R>> {
        self.check_point(xi)?;
        Ok(Potential {
            value: self.potential_value(xi),
            gradient: self
                .residual_unchecked(xi)
                .into_iter()
                .map(|r| -r)
                .collect(),
            hessian: self.hessian(xi),
        })
    }

    fn potential_value(&self, xi: &[R]) -> R {
        let mut terms = Vec::new();
        for (k, x) in xi.iter().enumerate() {
            for (a, w) in self.a.iter().zip(&self.weights) {
                terms.push(-(w.clone() * (x.clone() - a.clone()).abs().ln()));
            }
            for y in &xi[k + 1..] {
                terms.push(-(R::from_i64(4) * (x.clone() - y.clone()).abs().ln()));
            }
        }
        compensated_sum(terms)
    }

    fn hessian(&self, xi: &[R]) -> Vec<Vec<R>> {
        let n = xi.len();
        let four = R::from_i64(4);
        let mut h = vec![vec![R::zero(); n]; n];
        for k in 0..n {
            let mut diag: Vec<R> = self
                .a
                .iter()
                .zip(&self.weights)
                .map(|(a, w)| w.clone() / (xi[k].clone() - a.clone()).square())
                .collect();
            for l in 0..n {
                if l != k {
                    let c = four.clone() / (xi[k].clone() - xi[l].clone()).square();
                    h[k][l] = -c.clone();
                    diag.push(c);
                }
            }
            h[k][k] = compensated_sum(diag);
        }
        h
    }

    /// Largest `α ≤ 1` keeping `ξ + α·p` strictly inside `D_m`, shrunk by `frac`.
    fn max_step(&self, xi: &[R], p: &[R], frac: &R) -> R {
        let mut alpha = R::from_i64(1) / frac.clone();
        let bands = self.bands();
        let mut limit = |gap: R, rate: R| {
            if rate < R::zero() {
                let cand = gap / (-rate);
                if cand < alpha {
                    alpha = cand;
                }
            }
        };
        for (k, &j) in bands.iter().enumerate() {
            limit(xi[k].clone() - self.a[j].clone(), p[k].clone());
            limit(self.a[j + 1].clone() - xi[k].clone(), -p[k].clone());
            if k + 1 < xi.len() {
                limit(
                    xi[k + 1].clone() - xi[k].clone(),
                    p[k + 1].clone() - p[k].clone(),
                );
            }
        }
        (alpha * frac.clone()).min(R::one())
    }
}

/// Value, gradient and Hessian of the barrier `φ`.
#[derive(Clone, Debug)]
pub struct Potential<R> {
    pub value: R,
    pub gradient: Vec<R>,
    pub hessian: Vec<Vec<R>>,
}

/// Neumaier summation for any [`Real`].
pub(crate) fn compensated_sum<R: Real>(items: Vec<R>) -> R {
    let mut sum = R::zero();
    let mut comp = R::zero();
    for x in items {
        let t = sum.clone() + x.clone();
        if sum.clone().abs() >= x.clone().abs() {
            comp = comp + ((sum - t.clone()) + x);
        } else {
            comp = comp + ((x - t.clone()) + sum);
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn inf_norm<R: Real>(v: &[R]) -> R {
    v.iter().fold(R::zero(), |m, x| m.max(x.clone().abs()))
}

/// Cholesky solve of `H x = b` for symmetric positive definite `H`.
pub(crate) fn cholesky_solve<R: Real>(h: &[Vec<R>], b: &[R]) -> Option<Vec<R>> {
    let n = b.len();
    let mut l = vec![vec![R::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[i][j].clone();
            for k in 0..j {
                s = s - l[i][k].clone() * l[j][k].clone();
            }
            if i == j {
                if !(s > R::zero()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j].clone();
            }
        }
    }
    let mut y = vec![R::zero(); n];
    for i in 0..n {
        let mut s = b[i].clone();
        for k in 0..i {
            s = s - l[i][k].clone() * y[k].clone();
        }
        y[i] = s / l[i][i].clone();
    }
    let mut x = vec![R::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i].clone();
        for k in i + 1..n {
            s = s - l[k][i].clone() * x[k].clone();
        }
        x[i] = s / l[i][i].clone();
    }
    Some(x)
}

/// Whether a symmetric matrix is positive definite (Cholesky succeeds).
pub fn is_positive_definite<R: Real>(h: &[Vec<R>]) -> bool {
    let zeros = vec![R::zero(); h.len()];
    cholesky_solve(h, &zeros).is_some()
}

/// Solver output: the point, its residual and whether it is in `D_m`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "R: Real"))]
pub struct NivenSolution<R = f64> {
    #[serde(serialize_with = "ser_reals")]
    pub xi: Vec<R>,
    pub residual_inf: f64,
    pub region_check: bool,
    pub iterations: usize,
}

fn ser_reals<R: Real, S: serde::Serializer>(v: &[R], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(R::to_f64))
}

/// Newton options.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the boundary a step may cover.
    pub boundary_fraction: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            max_iterations: 200,
            boundary_fraction: 0.95,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Minimises `φ` on `D_m` from the Chebyshev start.
pub fn solve<R: Real>(problem: &NivenProblem<R>, tol: f64) -> Result<NivenSolution<R>> {
    solve_from(
        problem,
        problem.chebyshev_start(),
        &SolveOptions::with_tol(tol),
    )
}

/// Damped Newton on `φ` from `start` (replaced by the Chebyshev start if it
/// is not inside `D_m`).
pub fn solve_from<R: Real>(
    problem: &NivenProblem<R>,
    start: Vec<R>,
    opts: &SolveOptions,
) -> Result<NivenSolution<R>> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let mut xi = if problem.in_domain(&start) {
        start
    } else {
        problem.chebyshev_start()
    };
    if problem.n() == 0 {
        return Ok(NivenSolution {
            xi,
            residual_inf: 0.0,
            region_check: true,
            iterations: 0,
        });
    }
    let tol = R::from_f64(opts.tol);
    let frac = R::from_f64(opts.boundary_fraction);
    let armijo = R::from_f64(1e-4);
    let mut res = problem.residual_unchecked(&xi);
    let mut res_norm = inf_norm(&res);
    let mut phi = problem.potential_value(&xi);
    for iter in 0..opts.max_iterations {
        if res_norm <= tol {
            return Ok(NivenSolution {
                region_check: problem.in_domain(&xi),
                residual_inf: res_norm.to_f64(),
                xi,
                iterations: iter,
            });
        }
        let h = problem.hessian(&xi);
        let Some(step) = cholesky_solve(&h, &res) else {
            break;
        };
        // Directional derivative of φ along the step: −R·p < 0.
        let slope = -compensated_sum(
            res.iter()
                .zip(&step)
                .map(|(r, p)| r.clone() * p.clone())
                .collect(),
        );
        let mut alpha = problem.max_step(&xi, &step, &frac);
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<R> = xi
                .iter()
                .zip(&step)
                .map(|(x, p)| x.clone() + alpha.clone() * p.clone())
                .collect();
            if problem.in_domain(&trial) {
                let trial_phi = problem.potential_value(&trial);
                let trial_res = problem.residual_unchecked(&trial);
                let trial_norm = inf_norm(&trial_res);
                let sufficient =
                    trial_phi <= phi.clone() + armijo.clone() * alpha.clone() * slope.clone();
                // Close to the minimiser φ is flat to rounding; a decrease of the
                // residual is then the reliable acceptance signal.
                if sufficient || trial_norm < res_norm {
                    xi = trial;
                    phi = trial_phi;
                    res = trial_res;
                    res_norm = trial_norm;
                    accepted = true;
                    break;
                }
            }
            alpha = alpha / R::from_i64(2);
        }
        if !accepted {
            break;
        }
    }
    if res_norm <= tol {
        return Ok(NivenSolution {
            region_check: problem.in_domain(&xi),
            residual_inf: res_norm.to_f64(),
            xi,
            iterations: opts.max_iterations,
        });
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: res_norm.to_f64(),
        last: xi.iter().map(R::to_f64).collect(),
    })
}
