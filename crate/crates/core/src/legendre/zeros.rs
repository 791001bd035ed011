use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;

use super::{poly_part_f64, IntPoly, LegendreSpec};
use crate::{Error, Result};

/// Exact dyadic rational `n / 2^s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    n: Integer,
    s: u32,
}

impl Dyadic {
    pub fn from_f64(x: f64) -> Self {
        let q = Rational::from_f64(x).expect("finite");
        let s = q.denom().find_one(0).unwrap_or(0);
        Dyadic {
            n: q.numer().clone(),
            s,
        }
    }

    fn at_scale(&self, s: u32) -> Integer {
        Integer::from(&self.n << (s - self.s))
    }

    pub fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        let s = a.s.max(b.s);
        Dyadic {
            n: a.at_scale(s) + b.at_scale(s),
            s: s + 1,
        }
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from((self.n.clone(), Integer::from(1) << self.s))
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64()
    }

    /// Exact decimal expansion (dyadic rationals have finite ones).
    pub fn to_decimal(&self) -> String {
        let digits = Integer::from(self.n.abs_ref()) * Integer::from(Integer::u_pow_u(5, self.s));
        let mut text = digits.to_string();
        let s = self.s as usize;
        if text.len() <= s {
            text = "0".repeat(s + 1 - text.len()) + &text;
        }
        let (int, frac) = text.split_at(text.len() - s);
        let sign = if self.n.cmp0().is_lt() { "-" } else { "" };
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{}", frac.trim_end_matches('0'))
        }
    }

    /// `other − self`.
    fn gap(&self, other: &Dyadic) -> Dyadic {
        let s = self.s.max(other.s);
        Dyadic {
            n: other.at_scale(s) - self.at_scale(s),
            s,
        }
    }

    /// Whether `self ≤ 2^{−bits}`.
    fn at_most_pow2(&self, bits: u32) -> bool {
        // n / 2^s ≤ 2^{−bits}  ⇔  n·2^bits ≤ 2^s
        Integer::from(&self.n << bits) <= (Integer::from(1) << self.s)
    }

    fn offset(&self, bits: u32, up: bool) -> Dyadic {
        let s = self.s.max(bits);
        let delta = Integer::from(1) << (s - bits);
        let base = self.at_scale(s);
        Dyadic {
            n: if up { base + delta } else { base - delta },
            s,
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let s = self.s.max(other.s);
        Some(self.at_scale(s).cmp(&other.at_scale(s)))
    }
}

/// Certified isolating interval `lo < ζ_k < hi` for the `k`-th zero in `(0, 1)`.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroEnclosure {
    pub k: usize,
    #[serde(serialize_with = "ser_decimal")]
    pub lo: Dyadic,
    #[serde(serialize_with = "ser_decimal")]
    pub hi: Dyadic,
}

fn ser_decimal<S: serde::Serializer>(d: &Dyadic, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&d.to_decimal())
}

impl ZeroEnclosure {
    pub fn lo_rational(&self) -> Rational {
        self.lo.to_rational()
    }

    pub fn hi_rational(&self) -> Rational {
        self.hi.to_rational()
    }

    pub fn width(&self) -> Rational {
        self.hi_rational() - self.lo_rational()
    }

    pub fn midpoint_f64(&self) -> f64 {
        Dyadic::midpoint(&self.lo, &self.hi).to_f64()
    }

    /// Whether the whole enclosure lies strictly below `√q`, decided exactly.
    pub fn below_sqrt(&self, q: &Rational) -> bool {
        self.hi_rational().square() < *q
    }

    /// Whether the whole enclosure lies strictly above `√q`, decided exactly.
    pub fn above_sqrt(&self, q: &Rational) -> bool {
        self.lo_rational().square() > *q
    }
}

/// Exact sign of `r(x²)` at a dyadic `x`.
struct SignOracle {
    r: IntPoly,
}

impl SignOracle {
    fn new(spec: LegendreSpec) -> Self {
        let r = spec.integer_poly().in_square(!spec.is_even());
        let content = r.coeffs().iter().fold(Integer::new(), |g, c| g.gcd(c));
        let coeffs = r
            .coeffs()
            .iter()
            .map(|c| Integer::from(c.div_exact_ref(&content)))
            .collect();
        SignOracle {
            r: IntPoly { coeffs },
        }
    }

    fn sign(&self, x: &Dyadic) -> Ordering {
        let big_n = Integer::from(x.n.square_ref());
        let s2 = 2 * x.s;
        let c = self.r.coeffs();
        let d = c.len() - 1;
        let mut acc = c[d].clone();
        for i in (0..d).rev() {
            acc *= &big_n;
            acc += Integer::from(&c[i] << (s2 * (d - i) as u32));
        }
        acc.cmp0()
    }
}

fn bisect(
    oracle: &SignOracle,
    mut lo: Dyadic,
    mut hi: Dyadic,
    bits: u32,
) -> Result<(Dyadic, Dyadic)> {
    let lo_sign = oracle.sign(&lo);
    while !lo.gap(&hi).at_most_pow2(bits) {
        let mid = Dyadic::midpoint(&lo, &hi);
        match oracle.sign(&mid) {
            Ordering::Equal => {
                let below = mid.offset(bits + 1, false);
                let above = mid.offset(bits + 1, true);
                let (sb, sa) = (oracle.sign(&below), oracle.sign(&above));
                if sb == Ordering::Equal || sa == Ordering::Equal || sb == sa {
                    return Err(Error::InvalidInput("degenerate sign pattern".into()));
                }
                return Ok((below, above));
            }
            s if s == lo_sign => lo = mid,
            _ => hi = mid,
        }
    }
    Ok((lo, hi))
}

/// Certified enclosures of all zeros of `P_ℓ^m` in `(0, 1)`, each of width at
/// most `2^{−bits}`, in ascending order.
///
/// The polynomial part has degree `ℓ − m` and definite parity, so it has at
/// most `⌊(ℓ−m)/2⌋` zeros in `(0, 1)`. Finding that many disjoint intervals
/// with an exact sign change therefore certifies every zero. The result is
/// also checked to lie below the turning point `η`.
pub fn zeros_exact_bits(spec: LegendreSpec, bits: u32) -> Result<Vec<ZeroEnclosure>> {
    let count = spec.zero_count();
    if count == 0 {
        return Ok(Vec::new());
    }
    let oracle = SignOracle::new(spec);
    let fail = |reason: String| Error::IsolationFailed {
        ell: spec.ell,
        m: spec.m,
        reason,
    };
    let mut n = 8 * (spec.ell as usize + 1);
    let mut last_reason = String::new();
    for _ in 0..8 {
        let grid: Vec<f64> = (0..n)
            .rev()
            .map(|i| (std::f64::consts::FRAC_PI_2 * i as f64 / n as f64).cos())
            .collect();
        let vals: Vec<f64> = grid.iter().map(|&x| poly_part_f64(spec, x)).collect();
        let cells: Vec<(f64, f64)> = (0..grid.len() - 1)
            .filter(|&i| vals[i] * vals[i + 1] < 0.0)
            .map(|i| (grid[i], grid[i + 1]))
            .collect();
        if cells.len() != count {
            last_reason = format!("found {} sign changes, expected {count}", cells.len());
            n *= 2;
            continue;
        }
        let brackets: Vec<(Dyadic, Dyadic)> = cells
            .iter()
            .map(|&(a, b)| (Dyadic::from_f64(a), Dyadic::from_f64(b)))
            .collect();
        let exact_ok = brackets.iter().all(|(a, b)| {
            let (sa, sb) = (oracle.sign(a), oracle.sign(b));
            sa != Ordering::Equal && sb != Ordering::Equal && sa != sb
        });
        if !exact_ok {
            last_reason = "floating-point sign change not confirmed exactly".into();
            n *= 2;
            continue;
        }
        let refined = brackets
            .into_par_iter()
            .map(|(a, b)| bisect(&oracle, a, b, bits))
            .collect::<Result<Vec<_>>>()?;
        let zeros: Vec<ZeroEnclosure> = refined
            .into_iter()
            .enumerate()
            .map(|(i, (lo, hi))| ZeroEnclosure { k: i + 1, lo, hi })
            .collect();
        certify(spec, &zeros).map_err(fail)?;
        return Ok(zeros);
    }
    Err(fail(last_reason))
}

fn certify(spec: LegendreSpec, zeros: &[ZeroEnclosure]) -> std::result::Result<(), String> {
    let zero = Dyadic {
        n: Integer::new(),
        s: 0,
    };
    let one = Dyadic {
        n: Integer::from(1),
        s: 0,
    };
    if zeros.first().is_some_and(|z| z.lo <= zero) {
        return Err("first enclosure touches 0".into());
    }
    if zeros.last().is_some_and(|z| z.hi >= one) {
        return Err("last enclosure touches 1".into());
    }
    if zeros.windows(2).any(|w| w[0].hi >= w[1].lo) {
        return Err("enclosures overlap".into());
    }
    let casimir = Rational::from(spec.casimir());
    let eta_sq = (casimir.clone() - Rational::from(spec.m as u64 * spec.m as u64)) / casimir;
    if let Some(z) = zeros.iter().find(|z| !z.below_sqrt(&eta_sq)) {
        return Err(format!("zero {} is not below the turning point", z.k));
    }
    Ok(())
}

/// [`zeros_exact_bits`] with the width given as a positive real.
pub fn zeros_exact(spec: LegendreSpec, width: f64) -> Result<Vec<ZeroEnclosure>> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "width must be positive, got {width}"
        )));
    }
    let bits = (-width.log2()).ceil().max(1.0) as u32;
    zeros_exact_bits(spec, bits)
}

/// CSV with header `ell,m,k,lo,hi`; endpoints are exact decimals.
pub fn zero_table_csv(rows: &[(LegendreSpec, Vec<ZeroEnclosure>)]) -> String {
    let mut out = String::from("ell,m,k,lo,hi\n");
    for (spec, zeros) in rows {
        for z in zeros {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                spec.ell,
                spec.m,
                z.k,
                z.lo.to_decimal(),
                z.hi.to_decimal()
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(l: u32, m: u32) -> LegendreSpec {
        LegendreSpec::new(l, m).unwrap()
    }

    #[test]
    fn dyadic_decimal_is_exact() {
        assert_eq!(Dyadic::from_f64(0.375).to_decimal(), "0.375");
        assert_eq!(Dyadic::from_f64(-2.5).to_decimal(), "-2.5");
        assert_eq!(Dyadic::from_f64(3.0).to_decimal(), "3");
        assert_eq!(Dyadic::from_f64(1.0 / 1024.0).to_decimal(), "0.0009765625");
    }

    #[test]
    fn analytic_roots() {
        let z = zeros_exact(spec(2, 0), 1e-20).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].lo_rational().square() < (1, 3));
        assert!(z[0].hi_rational().square() > (1, 3));
        assert!(z[0].width() <= Rational::from_f64(1e-20).unwrap());

        let z = zeros_exact(spec(3, 1), 1e-20).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].lo_rational().square() < (1, 5));
        assert!(z[0].hi_rational().square() > (1, 5));
    }

    #[test]
    fn degree_90_order_27() {
        let sp = spec(90, 27);
        let z = zeros_exact(sp, 1e-20).unwrap();
        assert_eq!(z.len(), 31);
        assert!(z.windows(2).all(|w| w[0].hi < w[1].lo));
        let eta = (1.0 - 27.0f64.powi(2) / 8190.0).sqrt();
        assert!(z.iter().all(|e| e.hi.to_f64() < eta));
        assert!(z[15].below_sqrt(&Rational::from((1, 3))));
    }

    #[test]
    fn no_zeros_when_order_is_close_to_degree() {
        assert!(zeros_exact(spec(5, 5), 1e-10).unwrap().is_empty());
        assert!(zeros_exact(spec(5, 4), 1e-10).unwrap().is_empty());
        assert_eq!(zeros_exact(spec(5, 3), 1e-10).unwrap().len(), 1);
    }

    #[test]
    fn reciprocal_sum_identity() {
        // Over all zeros ζ ≠ ±1 in (−1,1): Σ 1/(2−2ζ²) = (ℓ−m)(ℓ+m+1)/(4(m+1)).
        for l in 1..=40u32 {
            for m in 0..=l {
                let sp = spec(l, m);
                let z = zeros_exact_bits(sp, 60).unwrap();
                let mut sum: f64 = z
                    .iter()
                    .map(|e| 2.0 / (2.0 - 2.0 * e.midpoint_f64().powi(2)))
                    .sum();
                if !sp.is_even() {
                    sum += 0.5;
                }
                let expect = ((l - m) * (l + m + 1)) as f64 / (4.0 * (m + 1) as f64);
                assert!(
                    (sum - expect).abs() <= 1e-8 * expect.max(1.0),
                    "ℓ={l} m={m}"
                );
            }
        }
    }

    #[test]
    fn csv_layout() {
        let sp = spec(2, 0);
        let z = zeros_exact_bits(sp, 8).unwrap();
        let csv = zero_table_csv(&[(sp, z)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("ell,m,k,lo,hi"));
        assert!(lines.next().unwrap().starts_with("2,0,1,0.57"));
    }
}
