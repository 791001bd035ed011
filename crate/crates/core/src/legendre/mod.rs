//! Associated Legendre polynomials without the Condon–Shortley sign:
//!
//! `P_ℓ^m(x) = (1−x²)^{m/2} · (d/dx)^{ℓ+m} (x²−1)^ℓ / (2^ℓ ℓ!)`.
//!
//! Values come from the upward three-term recurrence in `ℓ` at fixed `m`
//! applied to the polynomial part `g_ℓ = P_ℓ^m / (1−x²)^{m/2}`, with
//! power-of-two rescaling so that high degrees never overflow. Zeros are
//! isolated on the exact integer polynomial `(d/dx)^{ℓ+m} (x²−1)^ℓ`.

mod wkb;
mod zeros;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::{Error, Mp, Real, Result};

pub use wkb::{
    approx_zero, phase_gaps, phase_theta, phase_theta_nu, wkb_approx, wkb_error_phase_form,
    wkb_sweep, wkb_sweep_csv, zero_phase_bound, zero_phase_bound_plain, zero_phase_gap, PhaseGap,
    SweepRow, WkbFrame,
};
pub use zeros::{zero_table_csv, zeros_exact, zeros_exact_bits, Dyadic, ZeroEnclosure};

/// Degree `ℓ` and order `m` with `0 ≤ m ≤ ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LegendreSpec {
    pub ell: u32,
    pub m: u32,
}

impl LegendreSpec {
    pub fn new(ell: u32, m: u32) -> Result<Self> {
        if m > ell {
            return Err(Error::InvalidInput(format!(
                "order m = {m} exceeds degree ℓ = {ell}"
            )));
        }
        Ok(LegendreSpec { ell, m })
    }

    /// Whether `ℓ − m` is even (the polynomial part is then even).
    pub fn is_even(&self) -> bool {
        (self.ell - self.m).is_multiple_of(2)
    }

    /// Number of zeros in `(0, 1)`.
    pub fn zero_count(&self) -> usize {
        ((self.ell - self.m) / 2) as usize
    }

    /// `ℓ(ℓ+1)`.
    pub fn casimir(&self) -> u64 {
        self.ell as u64 * (self.ell as u64 + 1)
    }

    /// The integer polynomial `(d/dx)^{ℓ+m} (x²−1)^ℓ`, coefficients by power.
    pub fn integer_poly(&self) -> IntPoly {
        let ell = self.ell;
        let shift = ell + self.m;
        let mut coeffs = vec![Integer::new(); (ell - self.m) as usize + 1];
        for i in 0..=ell {
            let power = 2 * i;
            if power < shift {
                continue;
            }
            // C(ℓ, i)·(−1)^{ℓ−i}·(2i)!/(2i−ℓ−m)!
            let mut c = Integer::from(Integer::binomial_u(ell, i));
            c *= Integer::from(Integer::factorial(power))
                / Integer::from(Integer::factorial(power - shift));
            if (ell - i) % 2 == 1 {
                c = -c;
            }
            coeffs[(power - shift) as usize] = c;
        }
        IntPoly { coeffs }
    }

    /// `2^ℓ ℓ!`, the denominator in Rodrigues' formula.
    pub fn rodrigues_denominator(&self) -> Integer {
        Integer::from(Integer::factorial(self.ell)) << self.ell
    }
}

/// Dense univariate polynomial with integer coefficients (index = power).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<Integer>,
}

impl IntPoly {
    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Integer::from(c * i as u32))
                .collect(),
        }
    }

    /// `r` with `p(x) = x^{odd}·r(x²)`, for `p` of definite parity.
    pub(crate) fn in_square(&self, odd: bool) -> IntPoly {
        IntPoly {
            coeffs: self
                .coeffs
                .iter()
                .skip(usize::from(odd))
                .step_by(2)
                .cloned()
                .collect(),
        }
    }
}

/// Polynomial part and its derivative from the scaled recurrence.
///
/// True values are `value·S^shift·(2m−1)!!` with `S = 2^SCALE_BITS`.
#[derive(Clone, Debug)]
pub(crate) struct Scaled<R> {
    pub value: R,
    pub deriv: R,
    pub shift: i64,
}

const SCALE_BITS: i32 = 256;

pub(crate) fn poly_part<R: Real>(spec: LegendreSpec, x: &R) -> Scaled<R> {
    let m = spec.m as i64;
    let mut prev = (R::zero(), R::zero());
    let mut cur = (R::one(), R::zero());
    let mut shift = 0i64;
    let down = R::from_f64(2f64.powi(-SCALE_BITS));
    for l in m..spec.ell as i64 {
        // (l−m+1) g_{l+1} = (2l+1) x g_l − (l+m) g_{l−1}
        let a = R::from_i64(2 * l + 1);
        let b = R::from_i64(l + m);
        let c = R::from_i64(l - m + 1);
        let value =
            (a.clone() * x.clone() * cur.0.clone() - b.clone() * prev.0.clone()) / c.clone();
        let deriv = (a * (cur.0.clone() + x.clone() * cur.1.clone()) - b * prev.1.clone()) / c;
        prev = cur;
        cur = (value, deriv);
        if cur.0.to_f64().abs().max(cur.1.to_f64().abs()) > 1e70 {
            for v in [&mut prev.0, &mut prev.1, &mut cur.0, &mut cur.1] {
                *v = v.clone() * down.clone();
            }
            shift += 1;
        }
    }
    Scaled {
        value: cur.0,
        deriv: cur.1,
        shift,
    }
}

fn rescale<R: Real>(mut v: R, shift: i64) -> R {
    let up = R::from_f64(2f64.powi(SCALE_BITS));
    let down = R::from_f64(2f64.powi(-SCALE_BITS));
    for _ in 0..shift.abs() {
        v = v * if shift > 0 { up.clone() } else { down.clone() };
    }
    v
}

fn double_factorial<R: Real>(m: u32) -> R {
    (1..=m as i64).fold(R::one(), |acc, k| acc * R::from_i64(2 * k - 1))
}

fn amplitude_factor<R: Real>(m: u32, x: &R) -> R {
    let s = (R::one() - x.clone().square()).sqrt();
    (0..m).fold(R::one(), |acc, _| acc * s.clone())
}

/// `P_ℓ^m(x)` at working precision `R`. Raw values overflow `f64` for large
/// orders; use [`eval_p`] for automatic promotion.
pub fn eval_p_in<R: Real>(spec: LegendreSpec, x: &R) -> R {
    let g = poly_part(spec, x);
    let v = g.value * double_factorial::<R>(spec.m) * amplitude_factor(spec.m, x);
    rescale(v, g.shift)
}

/// `P_ℓ^m(x)` in double precision, evaluated in extended precision when
/// `ℓ > 200`.
pub fn eval_p(spec: LegendreSpec, x: f64) -> f64 {
    if spec.ell > 200 {
        crate::real::with_precision(crate::real::precision().max(128), || {
            eval_p_in::<Mp>(spec, &Mp::from_f64(x)).to_f64()
        })
    } else {
        eval_p_in(spec, &x)
    }
}

/// The exact polynomial part `p(x) = (d/dx)^{ℓ+m} (x²−1)^ℓ` together with the
/// Rodrigues denominator, so that `P_ℓ^m = (1−x²)^{m/2}·p/den`.
pub fn eval_p_exact(spec: LegendreSpec) -> (IntPoly, Integer) {
    (spec.integer_poly(), spec.rodrigues_denominator())
}

/// Normalized `P̄`: `P/P(0)` for even `ℓ − m`, `√(ℓ(ℓ+1)−m²)·P/P'(0)` for odd.
pub fn normalize_in<R: Real>(spec: LegendreSpec, x: &R) -> R {
    let at_x = poly_part(spec, x);
    let at_0 = poly_part(spec, &R::zero());
    let amp = amplitude_factor(spec.m, x);
    if spec.is_even() {
        rescale(at_x.value / at_0.value * amp, at_x.shift - at_0.shift)
    } else {
        let scale = R::from_i64((spec.casimir() - (spec.m as u64).pow(2)) as i64).sqrt();
        rescale(
            scale * at_x.value / at_0.deriv * amp,
            at_x.shift - at_0.shift,
        )
    }
}

pub fn normalize(spec: LegendreSpec, x: f64) -> f64 {
    if spec.ell > 200 {
        crate::real::with_precision(crate::real::precision().max(128), || {
            normalize_in::<Mp>(spec, &Mp::from_f64(x)).to_f64()
        })
    } else {
        normalize_in(spec, &x)
    }
}

/// Sign of the polynomial part at `x` in double precision (only used to
/// locate candidate sign changes; every decision is re-checked exactly).
pub(crate) fn poly_part_f64(spec: LegendreSpec, x: f64) -> f64 {
    poly_part(spec, &x).value
}
