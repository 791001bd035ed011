//! The Pell-type equation `p² − 32q² = −7` and the exclusion of its
//! nontrivial solutions.
//!
//! A solution `(p, q)` corresponds to a degree `N = (p−1)/2` and
//! `m₁ + ε₁ = q`, i.e. to a candidate `(ε, m)` whose middle Niven component
//! could vanish identically along the cone family. The candidate is excluded
//! when the `k₀`-th zero of the associated Legendre polynomial provably
//! misses `1/√3`.

use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::legendre::{
    phase_gaps, phase_theta_nu, zero_phase_bound, zero_phase_bound_plain, zeros_exact,
    LegendreSpec, WkbFrame, ZeroEnclosure,
};
use crate::real::with_precision;
use crate::{Error, Mp, Real, Result};

/// `p² − 32q² = −7` with its position `(α, σ)` in the closed-form family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PellSolution {
    #[serde(serialize_with = "ser_int")]
    pub p: Integer,
    #[serde(serialize_with = "ser_int")]
    pub q: Integer,
    pub alpha: u32,
    pub sigma: i8,
}

fn ser_int<S: serde::Serializer>(v: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(x) => s.serialize_u64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

impl PellSolution {
    pub fn verify(&self) -> bool {
        Integer::from(&self.p * &self.p) - Integer::from(32) * Integer::from(&self.q * &self.q)
            == -7
    }

    /// `(p, q) ↦ (17p + 96q, 3p + 17q)`, multiplication by the unit `17 + 3√32`.
    fn next(&self) -> Self {
        PellSolution {
            p: Integer::from(17 * &self.p) + Integer::from(96 * &self.q),
            q: Integer::from(3 * &self.p) + Integer::from(17 * &self.q),
            alpha: self.alpha + 1,
            sigma: self.sigma,
        }
    }
}

/// The first `count` positive solutions, ascending in `p`.
pub fn pell_enumerate(count: usize) -> Vec<PellSolution> {
    let mut plus = PellSolution {
        p: Integer::from(5),
        q: Integer::from(1),
        alpha: 0,
        sigma: 1,
    };
    let mut minus = PellSolution {
        p: Integer::from(11),
        q: Integer::from(2),
        alpha: 1,
        sigma: -1,
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let take_plus = plus.p < minus.p;
        let pick = if take_plus { &mut plus } else { &mut minus };
        let next = pick.next();
        let cur = std::mem::replace(pick, next);
        debug_assert!(cur.verify());
        out.push(cur);
    }
    out
}

/// `q` and `N` from `(4√2 ± 5)ψ^{±α}` with `ψ = 17 + 12√2`, evaluated at
/// `bits` of precision.
pub fn closed_form(alpha: u32, sigma: i8, bits: u32) -> (Float, Float) {
    let sqrt2 = Float::with_val(bits, 2).sqrt();
    let psi = Float::with_val(bits, 17) + Float::with_val(bits, &sqrt2 * 12);
    let up = Float::with_val(bits, rug::ops::Pow::pow(&psi, alpha));
    let down = Float::with_val(bits, 1) / &up;
    let four_r2 = Float::with_val(bits, &sqrt2 * 4);
    let s5 = Float::with_val(bits, 5 * sigma as i32);
    let a = Float::with_val(bits, &four_r2 + &s5) * &up;
    let b = Float::with_val(bits, &four_r2 - &s5) * &down;
    let q = Float::with_val(bits, &a + &b) / (Float::with_val(bits, &sqrt2 * 8));
    let n = (Float::with_val(bits, &a - &b) - 2u32) / 4u32;
    (q, n)
}

/// Candidate `(ε, m, k₀)` attached to a Pell solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExclusionCandidate {
    #[serde(serialize_with = "ser_int")]
    pub p: Integer,
    #[serde(serialize_with = "ser_int")]
    pub q: Integer,
    pub m: [u64; 2],
    pub eps: [u8; 3],
    pub k0: u64,
    #[serde(rename = "N")]
    pub degree: u64,
}

impl ExclusionCandidate {
    /// The two small solutions `m = (1, 0)` are genuine, not candidates for
    /// exclusion.
    pub fn is_trivial(&self) -> bool {
        self.degree < 90
    }

    /// `N² + N − 8(m₁+ε₁)² + 2 = 0`.
    pub fn satisfies_pell(&self) -> bool {
        let n = Integer::from(self.degree);
        let q = Integer::from(self.m[0] + self.eps[0] as u64);
        Integer::from(&n * &n) + &n - Integer::from(8) * Integer::from(&q * &q) + 2 == 0
    }

    /// Order `2m₂ + ε₂ + ε₃` of the associated Legendre polynomial.
    pub fn legendre_order(&self) -> u64 {
        2 * self.m[1] + self.eps[1] as u64 + self.eps[2] as u64
    }

    pub fn legendre_spec(&self) -> Result<LegendreSpec> {
        let ell = u32::try_from(self.degree).map_err(|_| {
            Error::InvalidInput("degree too large for a Legendre evaluation".into())
        })?;
        LegendreSpec::new(ell, self.legendre_order() as u32)
    }

    /// `ν < 0.304`, decided exactly: `10⁶·order² < 304²·N(N+1)`.
    pub fn nu_below_bound(&self) -> bool {
        let o = Integer::from(self.legendre_order());
        let n = Integer::from(self.degree);
        Integer::from(1_000_000) * Integer::from(&o * &o)
            < Integer::from(304u32 * 304) * (&n * Integer::from(&n + 1u32))
    }
}

pub fn to_candidates(sol: &PellSolution) -> Result<Vec<ExclusionCandidate>> {
    if !sol.verify() {
        return Err(Error::InvalidInput(format!(
            "({}, {}) does not solve p² − 32q² = −7",
            sol.p, sol.q
        )));
    }
    let to_u64 = |v: &Integer, what: &str| {
        v.to_u64()
            .ok_or_else(|| Error::InvalidInput(format!("{what} = {v} exceeds 64 bits")))
    };
    let p = to_u64(&sol.p, "p")?;
    let q = to_u64(&sol.q, "q")?;
    let degree = (p - 1) / 2;
    let (m1, e1) = if q % 2 == 1 { (q, 0u8) } else { (q - 1, 1u8) };
    let e3 = (degree % 2) as u8;
    let used = 2 * q + e3 as u64;
    if degree < used {
        return Err(Error::Infeasible(format!(
            "N = {degree} leaves no room for m₂"
        )));
    }
    let cand = ExclusionCandidate {
        p: sol.p.clone(),
        q: sol.q.clone(),
        m: [m1, (degree - used) / 2],
        eps: [e1, e1, e3],
        k0: m1.div_ceil(2),
        degree,
    };
    debug_assert!(cand.satisfies_pell());
    Ok(vec![cand])
}

/// `(m₁+ε₁+1)/(4|m|+2|ε|) = (q+1)/(2N)`, exactly.
pub fn quotient_bound(c: &ExclusionCandidate) -> Rational {
    Rational::from((c.m[0] + c.eps[0] as u64 + 1, 2 * c.degree))
}

/// Outcome of the exclusion inequality for one candidate.
#[derive(Clone, Debug, Serialize)]
pub struct ExclusionReport {
    #[serde(serialize_with = "ser_int")]
    pub p: Integer,
    #[serde(serialize_with = "ser_int")]
    pub q: Integer,
    pub m: [u64; 2],
    pub eps: [u8; 3],
    pub k0: u64,
    #[serde(rename = "N")]
    pub degree: u64,
    pub nu: f64,
    /// `ϑ(1/√3)` at the candidate's own `ν`.
    pub theta: f64,
    /// `ϑ(1/√3)` at `ν = 0.304`, a lower bound for `theta` valid for every
    /// nontrivial candidate.
    pub theta_nu_bound: f64,
    /// `h(k₀ − (1+(−1)^{ε₁})/4)π`, the phase the `k₀`-th zero approximately takes.
    pub phase_bound: f64,
    /// The same phase bounded through the quotient bound, `(q+1)/(2N)·π`.
    pub quotient_phase: f64,
    pub zero_phase_bound: f64,
    pub zero_phase_bound_plain: f64,
    /// `theta − phase_bound − zero_phase_bound`.
    pub margin: f64,
    /// `theta_nu_bound − (33/180)π − zero_phase_bound`, the margin that holds
    /// uniformly over all nontrivial candidates.
    pub uniform_margin: f64,
    pub excluded: bool,
    /// Certified enclosure of the `k₀`-th zero (computed for `N ≤ 400`).
    pub zero: Option<ZeroEnclosure>,
    /// Whether that enclosure lies strictly below `1/√3`.
    pub zero_below_target: Option<bool>,
    /// `|ϑ(ζ_{k₀}) − phase_bound|` over the enclosure; it should not exceed
    /// `zero_phase_bound`.
    pub zero_phase_gap: Option<f64>,
    pub precision: u32,
}

/// Degrees up to which the exclusion is cross-checked with a certified zero.
pub const CERTIFIED_ZERO_LIMIT: u64 = 400;

/// Runs the exclusion inequality for a nontrivial candidate at `bits` of
/// working precision.
pub fn exclusion_check(c: &ExclusionCandidate, bits: u32) -> Result<ExclusionReport> {
    if c.is_trivial() {
        return Err(Error::PreconditionViolation(format!(
            "m = ({}, {}) is one of the genuine solutions, not an exclusion candidate",
            c.m[0], c.m[1]
        )));
    }
    if !c.satisfies_pell() || c.eps[0] != c.eps[1] || c.m[0].is_multiple_of(2) {
        return Err(Error::PreconditionViolation(
            "not a candidate of the Pell family".into(),
        ));
    }
    if !c.nu_below_bound() {
        return Err(Error::PreconditionViolation("ν ≥ 0.304".into()));
    }
    let spec = c.legendre_spec()?;
    let report = with_precision(bits, || -> Result<ExclusionReport> {
        let frame = WkbFrame::<Mp>::new(spec);
        let target = Mp::one() / Mp::from_i64(3).sqrt();
        let theta = frame.phase(&target)?;
        let theta_nu_bound = phase_theta_nu(&Mp::ratio(304, 1000), &target)?;
        let shift = if c.eps[0] == 0 {
            Mp::ratio(1, 2)
        } else {
            Mp::zero()
        };
        let phase_bound = frame.h.clone() * (Mp::from_i64(c.k0 as i64) - shift) * Mp::pi();
        let quotient_phase = Mp::from_rational(&quotient_bound(c)) * Mp::pi();
        let k0 = c.k0 as usize;
        let cor = zero_phase_bound(&frame, k0);
        let margin = theta.clone() - phase_bound.clone() - cor.clone();
        let uniform_margin = theta_nu_bound.clone() - Mp::ratio(33, 180) * Mp::pi() - cor.clone();
        // A few dozen roundings of relative size 2^{−bits}, generously counted.
        let error = Mp::from_i64(1024) * Mp::epsilon();
        if margin.clone().abs() <= error {
            return Err(Error::PrecisionInsufficient {
                margin: margin.to_f64(),
                error: error.to_f64(),
            });
        }
        Ok(ExclusionReport {
            p: c.p.clone(),
            q: c.q.clone(),
            m: c.m,
            eps: c.eps,
            k0: c.k0,
            degree: c.degree,
            nu: frame.nu.to_f64(),
            theta: theta.to_f64(),
            theta_nu_bound: theta_nu_bound.to_f64(),
            phase_bound: phase_bound.to_f64(),
            quotient_phase: quotient_phase.to_f64(),
            zero_phase_bound: cor.to_f64(),
            zero_phase_bound_plain: zero_phase_bound_plain(&frame, k0).to_f64(),
            excluded: margin > Mp::zero(),
            margin: margin.to_f64(),
            uniform_margin: uniform_margin.to_f64(),
            zero: None,
            zero_below_target: None,
            zero_phase_gap: None,
            precision: bits,
        })
    })?;
    let mut report = report;
    if c.degree <= CERTIFIED_ZERO_LIMIT {
        let zeros = zeros_exact(spec, 1e-20)?;
        let z = zeros
            .get(c.k0 as usize - 1)
            .cloned()
            .ok_or(Error::IndexOutOfRange {
                index: c.k0 as usize,
                available: zeros.len(),
            })?;
        report.zero_below_target = Some(z.below_sqrt(&Rational::from((1, 3))));
        report.zero_phase_gap = Some(phase_gaps(spec, std::slice::from_ref(&z))?[0].gap);
        report.zero = Some(z);
    }
    Ok(report)
}

impl ExclusionReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data serializes")
    }
}
