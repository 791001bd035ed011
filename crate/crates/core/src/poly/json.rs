use rug::Rational;
use serde::{Deserialize, Serialize};

use super::{cone::parse_rational, Coeff, HomogeneousPoly};
use crate::{Error, Result};

/// Canonical JSON form of a polynomial; terms in descending graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub d: usize,
    #[serde(rename = "N")]
    pub degree: u32,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub num: String,
    pub den: String,
}

impl<C: Coeff> From<&HomogeneousPoly<C>> for PolyJson {
    fn from(p: &HomogeneousPoly<C>) -> Self {
        PolyJson {
            d: p.dim(),
            degree: p.degree(),
            terms: p
                .terms()
                .map(|(m, c)| {
                    let q = c.to_rational();
                    TermJson {
                        exp: m.exps().to_vec(),
                        num: q.numer().to_string(),
                        den: q.denom().to_string(),
                    }
                })
                .collect(),
        }
    }
}

impl TryFrom<&PolyJson> for HomogeneousPoly<Rational> {
    type Error = Error;

    fn try_from(j: &PolyJson) -> Result<Self> {
        let terms = j
            .terms
            .iter()
            .map(|t| {
                Ok((
                    t.exp.clone(),
                    parse_rational(&format!("{}/{}", t.num, t.den))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        HomogeneousPoly::from_terms(j.d, j.degree, terms)
    }
}

impl<C: Coeff> HomogeneousPoly<C> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PolyJson::from(self)).expect("plain data serializes")
    }
}

impl HomogeneousPoly<Rational> {
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: PolyJson = serde_json::from_value(v.clone())
            .map_err(|e| Error::InvalidInput(format!("malformed polynomial JSON: {e}")))?;
        Self::try_from(&j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let p = HomogeneousPoly::from_terms(
            3,
            2,
            [
                (vec![0, 0, 2], Rational::from((1, 4))),
                (vec![2, 0, 0], Rational::from(-1)),
                (vec![0, 2, 0], Rational::from((3, 4))),
            ],
        )
        .unwrap();
        let v = p.to_json();
        assert_eq!(v["N"], 2);
        assert_eq!(v["terms"][0]["exp"], serde_json::json!([2, 0, 0]));
        assert_eq!(v["terms"][0]["num"], "-1");
        assert_eq!(v["terms"][2]["den"], "4");
        assert_eq!(HomogeneousPoly::from_json(&v).unwrap(), p);
    }

    #[test]
    fn float_coefficients_serialize_exactly() {
        let p = HomogeneousPoly::<f64>::monomial(vec![1, 0], 0.375);
        let v = p.to_json();
        assert_eq!(v["terms"][0]["num"], "3");
        assert_eq!(v["terms"][0]["den"], "8");
    }
}
