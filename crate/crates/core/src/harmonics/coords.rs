//! Conical coordinates `(r, s₁, …, s_{d−1})` with `a₁ < s₁ < a₂ < … < s_{d−1} < a_d`,
//! the `s_j` being the roots of `Σ_j x_j²/(s − a_j) = 0`.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConicalCoords {
    pub r: f64,
    pub s: Vec<f64>,
}

fn check_a(a: &[f64]) -> Result<()> {
    if a.len() < 2 || a.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(
            "a must be strictly ascending with d ≥ 2".into(),
        ));
    }
    Ok(())
}

/// Forward map on the open positive orthant.
pub fn cartesian_to_conical(x: &[f64], a: &[f64]) -> Result<ConicalCoords> {
    check_a(a)?;
    if x.len() != a.len() {
        return Err(Error::InvalidInput("x and a differ in length".into()));
    }
    if x.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::DomainViolation(
            "conical coordinates need x in (0, ∞)^d".into(),
        ));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let w: Vec<f64> = x.iter().map(|v| (v / r).powi(2)).collect();
    // Σ w_j/(s − a_j) falls from +∞ to −∞ across each gap.
    let f = |s: f64| w.iter().zip(a).map(|(wj, aj)| wj / (s - aj)).sum::<f64>();
    let s = a
        .windows(2)
        .map(|gap| {
            let (mut lo, mut hi) = (gap[0], gap[1]);
            loop {
                let mid = lo + (hi - lo) / 2.0;
                if mid <= lo || mid >= hi {
                    break mid;
                }
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        })
        .collect();
    Ok(ConicalCoords { r, s })
}

/// Inverse map `x_j² = r² Π_i (a_j − s_i) / Π_{i≠j} (a_j − a_i)`, with signs
/// from `signs` (all positive when `None`).
///
/// `s_j` may sit on an endpoint of its gap, which puts `x` on a coordinate
/// hyperplane.
pub fn conical_to_cartesian(
    coords: &ConicalCoords,
    a: &[f64],
    signs: Option<&[i8]>,
) -> Result<Vec<f64>> {
    check_a(a)?;
    let d = a.len();
    if coords.s.len() != d - 1 {
        return Err(Error::InvalidInput(format!(
            "expected {} angular coordinates",
            d - 1
        )));
    }
    if !(coords.r >= 0.0) {
        return Err(Error::InvalidInput("r must be non-negative".into()));
    }
    let s = &coords.s;
    let interlaced = s
        .iter()
        .enumerate()
        .all(|(j, sj)| a[j] <= *sj && *sj <= a[j + 1])
        && s.windows(2).all(|w| w[0] < w[1]);
    if !interlaced {
        return Err(Error::InterlacingViolation);
    }
    if let Some(sg) = signs {
        if sg.len() != d || sg.iter().any(|v| v.abs() != 1) {
            return Err(Error::InvalidInput(
                "signs must be ±1, one per coordinate".into(),
            ));
        }
    }
    let r2 = coords.r * coords.r;
    (0..d)
        .map(|j| {
            let num: f64 = s.iter().map(|si| a[j] - si).product();
            let den: f64 = (0..d).filter(|&i| i != j).map(|i| a[j] - a[i]).product();
            let sq = r2 * num / den;
            if sq < 0.0 {
                return Err(Error::NegativeRadicand {
                    component: j + 1,
                    value: sq,
                });
            }
            let sign = signs.map_or(1.0, |sg| sg[j] as f64);
            Ok(sign * sq.sqrt())
        })
        .collect()
}
