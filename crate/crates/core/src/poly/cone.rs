use std::fmt;

use rand::Rng;
use rug::Rational;
use serde::{Deserialize, Serialize};

use super::HomogeneousPoly;
use crate::{Error, Result};

/// Parameters `a` of the cone `{Σ x_j²/a_j = 0}`, stored in ascending order.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeParams {
    #[serde(with = "rational_strings")]
    a: Vec<Rational>,
    inverse_sum_zero: bool,
}

impl ConeParams {
    pub fn new(mut a: Vec<Rational>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a cone needs at least 2 parameters, got {}",
                a.len()
            )));
        }
        if let Some(j) = a.iter().position(|x| x.cmp0().is_eq()) {
            return Err(Error::InvalidInput(format!("a_{} is zero", j + 1)));
        }
        a.sort();
        let inv_sum: Rational = a.iter().map(|x| Rational::from(x.recip_ref())).sum();
        Ok(ConeParams {
            inverse_sum_zero: inv_sum.cmp0().is_eq(),
            a,
        })
    }

    /// Parses a comma-separated list of integers or `num/den` fractions.
    /// Decimal literals are rejected: the cone must be given exactly.
    pub fn parse(s: &str) -> Result<Self> {
        let a = s
            .split(',')
            .map(|tok| parse_rational(tok.trim()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(a)
    }

    /// Random parameters with `Σ 1/a_j = 0` and pairwise distinct entries.
    pub fn random_harmonic<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        assert!(d >= 2);
        loop {
            let mut inv: Vec<Rational> = (0..d - 1)
                .map(|_| {
                    let num = loop {
                        let n: i64 = rng.gen_range(-12..=12);
                        if n != 0 {
                            break n;
                        }
                    };
                    Rational::from((num, rng.gen_range(1..=9i64)))
                })
                .collect();
            let last: Rational = -inv.iter().cloned().sum::<Rational>();
            if last.cmp0().is_eq() {
                continue;
            }
            inv.push(last);
            let a: Vec<Rational> = inv.into_iter().map(|x| x.recip()).collect();
            let p = Self::new(a).expect("nonzero entries");
            if p.is_distinct() {
                return p;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn values(&self) -> &[Rational] {
        &self.a
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.a.iter().map(|x| x.to_f64()).collect()
    }

    pub fn inverse_sum_zero(&self) -> bool {
        self.inverse_sum_zero
    }

    pub fn is_distinct(&self) -> bool {
        self.a.windows(2).all(|w| w[0] < w[1])
    }

    pub fn require_distinct(&self) -> Result<()> {
        if self.is_distinct() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "cone parameters {self} are not pairwise distinct"
            )))
        }
    }

    pub fn rescale(&self, lambda: &Rational) -> Result<Self> {
        if lambda.cmp0().is_le() {
            return Err(Error::InvalidInput(
                "rescaling factor must be positive".into(),
            ));
        }
        Self::new(self.a.iter().map(|x| Rational::from(x * lambda)).collect())
    }

    /// The quadric `K_a(x) = Σ x_j²/a_j`.
    pub fn quadric(&self) -> HomogeneousPoly {
        HomogeneousPoly::quadric(&self.a)
    }
}

impl fmt::Display for ConeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Debug for ConeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConeParams{self}")
    }
}

pub(crate) fn parse_rational(tok: &str) -> Result<Rational> {
    let bad = || Error::InvalidInput(format!("'{tok}' is not an integer or num/den fraction"));
    if tok.is_empty() || tok.contains(['.', 'e', 'E']) {
        return Err(bad());
    }
    let value = match tok.split_once('/') {
        Some((n, d)) => {
            let n: rug::Integer = n.trim().parse().map_err(|_| bad())?;
            let d: rug::Integer = d.trim().parse().map_err(|_| bad())?;
            if d.cmp0().is_eq() {
                return Err(Error::InvalidInput(format!("'{tok}' has zero denominator")));
            }
            Rational::from((n, d))
        }
        None => Rational::from(tok.parse::<rug::Integer>().map_err(|_| bad())?),
    };
    Ok(value)
}

mod rational_strings {
    use rug::Rational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|t| super::parse_rational(t).map_err(D::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_sorts_and_flags_harmonic_cones() {
        let c = ConeParams::parse("4, -1, 4/3").unwrap();
        assert_eq!(c.to_string(), "(-1, 4/3, 4)");
        assert!(c.inverse_sum_zero());
        assert!(!ConeParams::parse("1,2,3").unwrap().inverse_sum_zero());
    }

    #[test]
    fn parse_rejects_decimals_and_zero() {
        assert!(ConeParams::parse("-1,1.5,3").is_err());
        assert!(ConeParams::parse("-1,0,3").is_err());
        assert!(ConeParams::parse("-1,1/0,3").is_err());
    }

    #[test]
    fn random_cones_are_harmonic_and_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 3..=5 {
            let c = ConeParams::random_harmonic(d, &mut rng);
            assert!(c.inverse_sum_zero() && c.is_distinct());
            assert!(c.quadric().laplacian().is_zero());
        }
    }
}
