//! Scalar abstraction shared by the floating-point algorithms.
//!
//! Everything numeric that may need more than double precision (Niven
//! solves feeding the pairwise identities, the phase function of the
//! exclusion test) is written against [`Real`]. `f64` is the default; [`Mp`]
//! wraps an MPFR float whose precision is taken from a thread-local setting
//! (see [`with_precision`]).

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::Float;

pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Nearest representable value of an exact rational.
    fn from_rational(q: &rug::Rational) -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn atan(self) -> Self;
    fn cos(self) -> Self;
    fn sin(self) -> Self;

    fn pi() -> Self;
    /// Unit roundoff of the current working precision.
    fn epsilon() -> Self;

    fn zero() -> Self {
        Self::from_i64(0)
    }

    fn one() -> Self {
        Self::from_i64(1)
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn square(self) -> Self {
        self.clone() * self
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn is_finite(&self) -> bool {
        self.to_f64().is_finite()
    }
}

impl Real for f64 {
    fn from_rational(q: &rug::Rational) -> Self {
        q.to_f64()
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn epsilon() -> Self {
        f64::EPSILON / 2.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

thread_local! {
    static PRECISION: Cell<u32> = const { Cell::new(128) };
}

/// Working precision (in bits) used when constructing [`Mp`] values on this thread.
pub fn precision() -> u32 {
    PRECISION.with(Cell::get)
}

/// Runs `f` with the thread-local [`Mp`] precision set to `bits`.
///
/// The setting is per thread: closures handed to a thread pool must set it
/// again themselves.
pub fn with_precision<R>(bits: u32, f: impl FnOnce() -> R) -> R {
    struct Restore(u32);
    impl Drop for Restore {
        fn drop(&mut self) {
            PRECISION.with(|p| p.set(self.0));
        }
    }
    let _restore = Restore(PRECISION.with(|p| p.replace(bits.max(24))));
    f()
}

/// Multiple-precision float backed by MPFR.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Mp(pub Float);

impl Mp {
    pub fn inner(&self) -> &Float {
        &self.0
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

macro_rules! mp_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Mp {
            type Output = Mp;
            fn $method(self, rhs: Mp) -> Mp {
                Mp($trait::$method(self.0, rhs.0))
            }
        }
    };
}

mp_binop!(Add, add);
mp_binop!(Sub, sub);
mp_binop!(Mul, mul);
mp_binop!(Div, div);

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(-self.0)
    }
}

impl Real for Mp {
    fn from_rational(q: &rug::Rational) -> Self {
        Mp(Float::with_val(precision(), q))
    }
    fn from_f64(x: f64) -> Self {
        Mp(Float::with_val(precision(), x))
    }
    fn from_i64(x: i64) -> Self {
        Mp(Float::with_val(precision(), x))
    }
    fn ratio(num: i64, den: i64) -> Self {
        Mp(Float::with_val(
            precision(),
            rug::Rational::from((num, den)),
        ))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn abs(self) -> Self {
        Mp(self.0.abs())
    }
    fn sqrt(self) -> Self {
        Mp(self.0.sqrt())
    }
    fn ln(self) -> Self {
        Mp(self.0.ln())
    }
    fn atan(self) -> Self {
        Mp(self.0.atan())
    }
    fn cos(self) -> Self {
        Mp(self.0.cos())
    }
    fn sin(self) -> Self {
        Mp(self.0.sin())
    }
    fn pi() -> Self {
        Mp(Float::with_val(precision(), Constant::Pi))
    }
    fn epsilon() -> Self {
        Mp(Float::with_val(
            precision(),
            Float::i_exp(1, -(precision() as i32)),
        ))
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_is_scoped() {
        let before = precision();
        let inner = with_precision(300, || {
            let x = Mp::from_i64(2).sqrt();
            assert_eq!(x.0.prec(), 300);
            precision()
        });
        assert_eq!(inner, 300);
        assert_eq!(precision(), before);
    }

    #[test]
    fn mp_matches_f64_on_elementary_functions() {
        with_precision(200, || {
            let x = Mp::ratio(3, 7);
            assert!((x.clone().atan().to_f64() - (3.0f64 / 7.0).atan()).abs() < 1e-16);
            assert!((x.clone().cos().to_f64() - (3.0f64 / 7.0).cos()).abs() < 1e-16);
            assert!((Mp::pi().to_f64() - std::f64::consts::PI).abs() < 1e-16);
            assert!(Mp::epsilon().to_f64() < 1e-59);
        });
    }
}
