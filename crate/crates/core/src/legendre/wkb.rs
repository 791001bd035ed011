use std::fmt::Write as _;

use serde::Serialize;

use super::{normalize, zeros_exact_bits, LegendreSpec, ZeroEnclosure};
use crate::real::with_precision;
use crate::{Error, Mp, Real, Result};

/// Semiclassical parameters of `P_ℓ^m`: `h = 1/√(ℓ(ℓ+1))`, `ν = m·h` and the
/// turning point `η = √(1−ν²)`.
#[derive(Clone, Debug)]
pub struct WkbFrame<R = f64> {
    pub spec: LegendreSpec,
    pub h: R,
    pub nu: R,
    pub eta: R,
}

impl<R: Real> WkbFrame<R> {
    pub fn new(spec: LegendreSpec) -> Self {
        let c = spec.casimir() as i64;
        let m = spec.m as i64;
        let h = R::one() / R::from_i64(c).sqrt();
        WkbFrame {
            spec,
            nu: R::from_i64(m) * h.clone(),
            eta: R::from_i64(c - m * m).sqrt() * h.clone(),
            h,
        }
    }

    /// `ϑ(η) = (1−ν)π/2`, the supremum of the phase.
    pub fn theta_max(&self) -> R {
        (R::one() - self.nu.clone()) * R::pi() / R::from_i64(2)
    }

    fn check(&self, x: &R) -> Result<()> {
        if x.clone().abs() < self.eta {
            Ok(())
        } else {
            Err(Error::DomainViolation(format!(
                "|x| = {:e} is not below the turning point η = {:e}",
                x.to_f64().abs(),
                self.eta.to_f64()
            )))
        }
    }

    /// `1 − (x/η)²`, computed as `(η−x)(η+x)/η²`.
    fn gap_sq(&self, x: &R) -> R {
        (self.eta.clone() - x.clone()) * (self.eta.clone() + x.clone()) / self.eta.clone().square()
    }

    pub fn phase(&self, x: &R) -> Result<R> {
        self.check(x)?;
        Ok(phase_core(
            &self.nu,
            &(x.clone() / self.eta.clone()),
            &self.gap_sq(x),
        ))
    }

    /// `ϑ(η) − ϑ(x)`, accurate up to the turning point.
    pub fn phase_to_turning(&self, x: &R) -> Result<R> {
        self.check(x)?;
        if *x <= R::zero() {
            return Ok(self.theta_max() + self.phase(&(-x.clone()))?);
        }
        // π/2 − atan(y) = atan(1/y) for y > 0.
        let inv = self.gap_sq(x).sqrt() * self.eta.clone() / x.clone();
        let tail = if self.nu > R::zero() {
            self.nu.clone() * (inv.clone() / self.nu.clone()).atan()
        } else {
            R::zero()
        };
        Ok(inv.atan() - tail)
    }

    /// `(1 − (x/η)²)^{−1/4}`.
    pub fn amplitude(&self, x: &R) -> Result<R> {
        self.check(x)?;
        Ok(R::one() / self.gap_sq(x).sqrt().sqrt())
    }
}

fn phase_core<R: Real>(nu: &R, z: &R, one_minus_z_sq: &R) -> R {
    let y = z.clone() / one_minus_z_sq.clone().sqrt();
    y.clone().atan() - nu.clone() * (nu.clone() * y).atan()
}

/// `ϑ(x)` for an explicit `ν`, with `η = √(1−ν²)`; `|x| < η` is required.
pub fn phase_theta_nu<R: Real>(nu: &R, x: &R) -> Result<R> {
    let eta_sq = R::one() - nu.clone().square();
    let z_sq = x.clone().square() / eta_sq.clone();
    if z_sq >= R::one() {
        return Err(Error::DomainViolation(format!(
            "x = {:e} is not below the turning point for ν = {:e}",
            x.to_f64(),
            nu.to_f64()
        )));
    }
    let z = x.clone() / eta_sq.sqrt();
    Ok(phase_core(nu, &z, &(R::one() - z_sq)))
}

pub fn phase_theta<R: Real>(frame: &WkbFrame<R>, x: &R) -> Result<R> {
    frame.phase(x)
}

/// WKB approximation `W` of `P̄` and its pointwise error bound
/// `(h/2)η^{−3}|x|(1−x²)(1−(x/η)²)^{−7/4}`.
pub fn wkb_approx<R: Real>(frame: &WkbFrame<R>, x: &R) -> Result<(R, R)> {
    let amp = frame.amplitude(x)?;
    let arg = frame.phase(x)? / frame.h.clone();
    let w = amp.clone()
        * if frame.spec.is_even() {
            arg.cos()
        } else {
            arg.sin()
        };
    let g = frame.gap_sq(x);
    let eta3 = frame.eta.clone() * frame.eta.clone() * frame.eta.clone();
    // (1−(x/η)²)^{−7/4} = amp / (1−(x/η)²)^{3/2}
    let bound = frame.h.clone() / R::from_i64(2) / eta3
        * x.clone().abs()
        * (R::one() - x.clone().square())
        * amp
        / (g.clone() * g.sqrt());
    Ok((w, bound))
}

/// Error bound in phase form: `(h/2)(1−(x/η)²)^{−1/4} / (ϑ(η) − ϑ(|x|))`.
///
/// The error `|W − P̄|` is even in `x`, so the bound is applied to `|x|`;
/// with the signed `ϑ(x)` it would collapse near `−η`, where the error does
/// not.
pub fn wkb_error_phase_form<R: Real>(frame: &WkbFrame<R>, x: &R) -> Result<R> {
    let amp = frame.amplitude(x)?;
    Ok(frame.h.clone() / R::from_i64(2) * amp / frame.phase_to_turning(&x.clone().abs())?)
}

fn target_phase<R: Real>(frame: &WkbFrame<R>, k: usize) -> R {
    let shift = if frame.spec.is_even() {
        R::ratio(1, 2)
    } else {
        R::zero()
    };
    frame.h.clone() * (R::from_i64(k as i64) - shift) * R::pi()
}

fn check_index(spec: LegendreSpec, k: usize) -> Result<()> {
    let available = spec.zero_count();
    if k == 0 || k > available {
        return Err(Error::IndexOutOfRange {
            index: k,
            available,
        });
    }
    Ok(())
}

/// The unique `x ∈ (0, η)` with `ϑ(x) = h(k − (1+(−1)^{ℓ−m})/4)π`, the WKB
/// prediction of the `k`-th zero in `(0, 1)`.
pub fn approx_zero<R: Real>(frame: &WkbFrame<R>, k: usize) -> Result<R> {
    check_index(frame.spec, k)?;
    let target = target_phase(frame, k);
    let mut lo = R::zero();
    let mut hi = frame.eta.clone();
    let tol = R::epsilon() * R::from_i64(8);
    for _ in 0..4000 {
        let mid = (lo.clone() + hi.clone()) / R::from_i64(2);
        if !(mid > lo && mid < hi) || hi.clone() - lo.clone() <= tol.clone() * hi.clone() {
            break;
        }
        if frame.phase(&mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / R::from_i64(2))
}

/// `(h/2)(ℓ−m−2k+0.42)^{−1}`.
pub fn zero_phase_bound<R: Real>(frame: &WkbFrame<R>, k: usize) -> R {
    let s = frame.spec;
    let denom = R::from_i64(s.ell as i64 - s.m as i64 - 2 * k as i64) + R::ratio(21, 50);
    frame.h.clone() / R::from_i64(2) / denom
}

/// `(h/2)(ℓ−m−2k)^{−1}`, the variant without the `0.42` offset.
pub fn zero_phase_bound_plain<R: Real>(frame: &WkbFrame<R>, k: usize) -> R {
    let s = frame.spec;
    let denom = R::from_i64(s.ell as i64 - s.m as i64 - 2 * k as i64);
    frame.h.clone() / R::from_i64(2) / denom
}

/// Distance between the phase of a certified zero and its WKB target.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseGap {
    pub k: usize,
    /// Upper bound for `|ϑ(ζ_k) − target|` over the whole enclosure.
    pub gap: f64,
    pub bound: f64,
    pub bound_plain: f64,
}

impl PhaseGap {
    pub fn within_bound(&self) -> bool {
        self.gap <= self.bound
    }
}

/// Phase gaps of certified zeros, evaluated at 128 bits.
pub fn phase_gaps(spec: LegendreSpec, zeros: &[ZeroEnclosure]) -> Result<Vec<PhaseGap>> {
    with_precision(128, || {
        let frame = WkbFrame::<Mp>::new(spec);
        zeros
            .iter()
            .map(|z| {
                let target = target_phase(&frame, z.k);
                let lo = frame.phase(&Mp::from_rational(&z.lo_rational()))? - target.clone();
                let hi = frame.phase(&Mp::from_rational(&z.hi_rational()))? - target;
                Ok(PhaseGap {
                    k: z.k,
                    gap: lo.abs().max(hi.abs()).to_f64(),
                    bound: zero_phase_bound(&frame, z.k).to_f64(),
                    bound_plain: zero_phase_bound_plain(&frame, z.k).to_f64(),
                })
            })
            .collect()
    })
}

/// Phase gap of the `k`-th zero, with the zero certified to width `2^{−bits}`.
pub fn zero_phase_gap(spec: LegendreSpec, k: usize, bits: u32) -> Result<PhaseGap> {
    check_index(spec, k)?;
    let zeros = zeros_exact_bits(spec, bits)?;
    Ok(phase_gaps(spec, &zeros[k - 1..k])?.remove(0))
}

/// One sample of a WKB sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub p_bar: f64,
    pub w: f64,
    pub err: f64,
    pub bound_direct: f64,
    pub bound_phase_form: f64,
}

impl SweepRow {
    pub fn dominated(&self) -> bool {
        self.err <= self.bound_direct && self.err <= self.bound_phase_form
    }
}

/// Samples `points` midpoints of a uniform partition of `(−η, η)`.
pub fn wkb_sweep(spec: LegendreSpec, points: usize) -> Vec<SweepRow> {
    let frame = WkbFrame::<f64>::new(spec);
    (0..points)
        .map(|i| {
            let x = frame.eta * (-1.0 + (2 * i + 1) as f64 / points as f64);
            let p_bar = normalize(spec, x);
            let (w, bound_direct) = wkb_approx(&frame, &x).expect("interior point");
            let bound_phase_form = wkb_error_phase_form(&frame, &x).expect("interior point");
            SweepRow {
                x,
                p_bar,
                w,
                err: (w - p_bar).abs(),
                bound_direct,
                bound_phase_form,
            }
        })
        .collect()
}

/// CSV with header `x,P_bar,W,err,bound_direct,bound_phase_form`.
pub fn wkb_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("x,P_bar,W,err,bound_direct,bound_phase_form\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?}",
            r.x, r.p_bar, r.w, r.err, r.bound_direct, r.bound_phase_form
        );
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
    fn frame_identities() {
        let f = WkbFrame::<f64>::new(spec(90, 27));
        assert!((f.h * (8190f64).sqrt() - 1.0).abs() < 1e-15);
        assert!((f.nu * f.nu + f.eta * f.eta - 1.0).abs() < 1e-15);
        assert!(f.nu < 0.304);
    }

    #[test]
    fn phase_basics() {
        let f = WkbFrame::<f64>::new(spec(42, 17));
        assert_eq!(f.phase(&0.0).unwrap(), 0.0);
        let near = f.eta * (1.0 - 1e-10);
        assert!((f.phase(&near).unwrap() - f.theta_max()).abs() < 1e-4);
        assert!(f.phase_to_turning(&near).unwrap() > 0.0);
        assert!(f.phase(&f.eta).is_err());
        let mut prev = -1.0;
        for i in 0..1000 {
            let x = f.eta * i as f64 / 1000.0;
            let t = f.phase(&x).unwrap();
            assert!(t > prev);
            prev = t;
            let sum = t + f.phase_to_turning(&x).unwrap();
            assert!((sum - f.theta_max()).abs() < 1e-13);
        }
    }

    #[test]
    fn phase_at_the_nu_bound() {
        let t = phase_theta_nu(&0.304f64, &(1.0 / 3f64.sqrt())).unwrap();
        assert!((0.5818..0.5819).contains(&t), "{t}");
    }

    #[test]
    fn origin_values() {
        let f = WkbFrame::<f64>::new(spec(10, 4));
        let (w, b) = wkb_approx(&f, &0.0).unwrap();
        assert_eq!((w, b), (1.0, 0.0));
        assert_eq!(normalize(spec(10, 4), 0.0), 1.0);
    }

    #[test]
    fn approximate_zeros() {
        let f = WkbFrame::<f64>::new(spec(2, 0));
        let x = approx_zero(&f, 1).unwrap();
        let exact = 1.0 / 3f64.sqrt();
        let gap = (f.phase(&x).unwrap() - f.phase(&exact).unwrap()).abs();
        assert!(gap <= zero_phase_bound(&f, 1));
        assert!(matches!(
            approx_zero(&f, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(approx_zero(&f, 0).is_err());

        let f = WkbFrame::<f64>::new(spec(90, 27));
        let x = approx_zero(&f, 16).unwrap();
        assert!(x < 1.0 / 3f64.sqrt() && x > 0.55);
    }

    #[test]
    fn sweep_bounds_dominate_for_figure_parameters() {
        for (l, m) in [(42, 17), (90, 27)] {
            let rows = wkb_sweep(spec(l, m), 10_000);
            assert!(rows.iter().all(SweepRow::dominated));
        }
    }

    #[test]
    fn phase_form_sampled_in_both_regimes() {
        let sp = spec(30, 6);
        let f = WkbFrame::<f64>::new(sp);
        let split = (2.0 * f.eta * f.eta - 1.0).sqrt();
        let rows = wkb_sweep(sp, 2000);
        let inner = rows.iter().filter(|r| r.x.abs() < split).count();
        assert!(inner > 0 && inner < rows.len());
        assert!(rows.iter().all(|r| r.err <= r.bound_phase_form));
    }

    #[test]
    fn phase_form_is_even() {
        let f = WkbFrame::<f64>::new(spec(42, 17));
        for x in [0.1, 0.5, 0.8] {
            assert_eq!(
                wkb_error_phase_form(&f, &x).unwrap(),
                wkb_error_phase_form(&f, &-x).unwrap()
            );
        }
    }

    #[test]
    fn bound_ratio_stays_bounded_at_the_turning_point() {
        // Both bounds grow like (η−x)^{−7/4}; their ratio has a finite limit.
        let f = WkbFrame::<f64>::new(spec(42, 17));
        let ratios: Vec<f64> = [1e-3, 1e-5, 1e-7]
            .iter()
            .map(|e| {
                let x = f.eta * (1.0 - e);
                wkb_error_phase_form(&f, &x).unwrap() / wkb_approx(&f, &x).unwrap().1
            })
            .collect();
        assert!((ratios[1] - ratios[2]).abs() < 1e-2 * ratios[2]);
        assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
    }

    #[test]
    fn gaps_for_degree_90() {
        let g = zero_phase_gap(spec(90, 27), 16, 67).unwrap();
        assert!(g.within_bound());
        assert!(g.bound <= 0.002);
        let g = zero_phase_gap(spec(2, 0), 1, 67).unwrap();
        assert!(g.within_bound());
    }

    #[test]
    fn extended_precision_phase_matches() {
        let x = 0.4;
        let a = WkbFrame::<f64>::new(spec(90, 27)).phase(&x).unwrap();
        let b = with_precision(256, || {
            WkbFrame::<Mp>::new(spec(90, 27))
                .phase(&Mp::from_f64(x))
                .unwrap()
                .to_f64()
        });
        assert!((a - b).abs() < 1e-15);
    }
}
