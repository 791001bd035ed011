//! Continuation of Niven solutions along a rational parameter curve `a(t)`.

use std::fmt;

use rug::Rational;
use serde::Serialize;

use super::{solve_from, NivenProblem, NivenSolution, SolveOptions};
use crate::{Error, Real, Result};

/// `a(t)` with every component a Möbius function `(p0 + p1·t)/(q0 + q1·t)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalCurve {
    #[serde(serialize_with = "ser_components")]
    components: Vec<[Rational; 4]>,
}

fn ser_components<S: serde::Serializer>(
    c: &[[Rational; 4]],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(
        c.iter()
            .map(|r| r.iter().map(|q| q.to_string()).collect::<Vec<_>>()),
    )
}

impl RationalCurve {
    /// Components given as `[p0, p1, q0, q1]`.
    pub fn new(components: Vec<[Rational; 4]>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidInput(
                "a curve needs at least two components".into(),
            ));
        }
        if components
            .iter()
            .any(|c| c[2].cmp0().is_eq() && c[3].cmp0().is_eq())
        {
            return Err(Error::InvalidInput(
                "component with identically zero denominator".into(),
            ));
        }
        Ok(RationalCurve { components })
    }

    /// `(−1, 2/(c+t), 2/(c−t))`. For `c = 1` this joins the round cone at
    /// `t = 0` to a degenerate cone at `t = 1`; `Σ 1/a_j(t) = 0` for every `c`
    /// only when `c = 1`.
    pub fn cone_family(shift: Rational) -> Self {
        let q = |x: i64| Rational::from(x);
        RationalCurve {
            components: vec![
                [q(-1), q(0), q(1), q(0)],
                [q(2), q(0), shift.clone(), q(1)],
                [q(2), q(0), shift, q(-1)],
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[[Rational; 4]] {
        &self.components
    }

    pub fn eval_exact(&self, t: &Rational) -> Result<Vec<Rational>> {
        self.components
            .iter()
            .map(|[p0, p1, q0, q1]| {
                let den = q0 + Rational::from(q1 * t);
                if den.cmp0().is_eq() {
                    return Err(Error::DomainViolation(format!(
                        "curve has a pole at t = {t}"
                    )));
                }
                Ok((p0 + Rational::from(p1 * t)) / den)
            })
            .collect()
    }

    pub fn eval<R: Real>(&self, t: &R) -> Result<Vec<R>> {
        let a: Vec<R> = self
            .components
            .iter()
            .map(|[p0, p1, q0, q1]| {
                let num = R::from_rational(p0) + R::from_rational(p1) * t.clone();
                let den = R::from_rational(q0) + R::from_rational(q1) * t.clone();
                num / den
            })
            .collect();
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::DomainViolation(format!(
                "curve has a pole at t = {}",
                t.to_f64()
            )));
        }
        if a.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::DomainViolation(format!(
                "a(t) is not strictly ascending at t = {}",
                t.to_f64()
            )));
        }
        Ok(a)
    }
}

impl fmt::Display for RationalCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn slope(s: &Rational) -> String {
            if *s == 1 {
                "t".into()
            } else {
                format!("{s}t")
            }
        }
        fn affine(c: &Rational, s: &Rational) -> (String, bool) {
            if s.cmp0().is_eq() {
                return (c.to_string(), false);
            }
            if c.cmp0().is_eq() {
                return (slope(s), false);
            }
            if *s < 0 {
                (format!("{c}-{}", slope(&Rational::from(-s))), true)
            } else {
                (format!("{c}+{}", slope(s)), true)
            }
        }
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|[p0, p1, q0, q1]| {
                let (num, num_sum) = affine(p0, p1);
                if q1.cmp0().is_eq() && *q0 == 1 {
                    return num;
                }
                let (den, _) = affine(q0, q1);
                let num = if num_sum { format!("({num})") } else { num };
                format!("{num}/({den})")
            })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Step control for [`trace_curve`].
#[derive(Clone, Debug)]
pub struct TraceSettings {
    /// Residual tolerance per sample. Near coalescing parameters the Hessian
    /// of the barrier reaches ~1e8, so double precision floors the residual
    /// near 1e-8; ask for less only with [`crate::Mp`].
    pub tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Consecutive accepted steps before the step is doubled.
    pub growth_after: usize,
    /// Newton iterations allowed per corrector.
    pub corrector_iterations: usize,
}

impl Default for TraceSettings {
    fn default() -> Self {
        TraceSettings {
            tol: 1e-8,
            initial_step: 1e-2,
            max_step: 5e-2,
            min_step: 1e-9,
            growth_after: 3,
            corrector_iterations: 40,
        }
    }
}

impl TraceSettings {
    pub fn with_tol(tol: f64) -> Self {
        TraceSettings {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "R: Real"))]
pub struct TraceSample<R = f64> {
    pub t: f64,
    #[serde(flatten)]
    pub solution: NivenSolution<R>,
}

/// Solutions of one `(ε, m)` along a curve, one sample per grid point.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "R: Real"))]
pub struct CurveTrace<R = f64> {
    pub curve: String,
    #[serde(skip)]
    pub curve_def: RationalCurve,
    pub eps: Option<Vec<u8>>,
    pub m: Vec<usize>,
    pub samples: Vec<TraceSample<R>>,
}

impl<R: Real> CurveTrace<R> {
    pub fn n(&self) -> usize {
        self.m.iter().sum()
    }

    /// `(t, ξ_k(t))` for the 1-based branch index `k`.
    pub fn branch(&self, k: usize) -> Result<Vec<(f64, f64)>> {
        if k == 0 || k > self.n() {
            return Err(Error::IndexOutOfRange {
                index: k,
                available: self.n(),
            });
        }
        Ok(self
            .samples
            .iter()
            .map(|s| (s.t, s.solution.xi[k - 1].to_f64()))
            .collect())
    }

    /// Sample at the grid point closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<&TraceSample<R>> {
        self.samples
            .iter()
            .min_by(|x, y| (x.t - t).abs().total_cmp(&(y.t - t).abs()))
    }

    /// Every sample lies in `D_m` of its own `a(t)`.
    pub fn respects_domain(&self) -> bool {
        self.samples.iter().all(|s| s.solution.region_check)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for k in 1..=self.n() {
            out.push_str(&format!(",xi_{k}"));
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!("{:?}", s.t));
            for x in &s.solution.xi {
                out.push_str(&format!(",{:?}", x.to_f64()));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialises")
    }
}

/// Moves each component to the same relative position in its band of `new`.
fn transport<R: Real>(xi: &[R], bands: &[usize], old: &[R], new: &[R]) -> Vec<R> {
    xi.iter()
        .zip(bands)
        .map(|(x, &j)| {
            let rel = (x.clone() - old[j].clone()) / (old[j + 1].clone() - old[j].clone());
            new[j].clone() + rel * (new[j + 1].clone() - new[j].clone())
        })
        .collect()
}

/// Predictor–corrector continuation of the solution with the weights and
/// `m` of `template` along `curve`, sampled at the ascending `grid`.
pub fn trace_curve<R: Real>(
    curve: &RationalCurve,
    template: &NivenProblem<R>,
    grid: &[f64],
    settings: &TraceSettings,
) -> Result<CurveTrace<R>> {
    if curve.dim() != template.dim() {
        return Err(Error::InvalidInput(format!(
            "curve has {} components, problem has {}",
            curve.dim(),
            template.dim()
        )));
    }
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(
            "grid must be non-empty and strictly increasing".into(),
        ));
    }
    for &t in grid {
        curve.eval(&R::from_f64(t))?;
    }
    let bands = template.bands();
    let full = SolveOptions::with_tol(settings.tol);
    let corrector = SolveOptions {
        max_iterations: settings.corrector_iterations,
        ..full.clone()
    };

    let mut t = grid[0];
    let mut a = curve.eval(&R::from_f64(t))?;
    let first = template.with_a(a.clone())?;
    let mut current = solve_from(&first, first.chebyshev_start(), &full)?;
    let mut samples = vec![TraceSample {
        t,
        solution: current.clone(),
    }];
    let mut step = settings.initial_step;
    let mut clean = 0usize;
    for &target in &grid[1..] {
        while t < target {
            let t_next = (t + step).min(target);
            let a_next = curve.eval(&R::from_f64(t_next))?;
            let problem = template.with_a(a_next.clone())?;
            let start = transport(&current.xi, &bands, &a, &a_next);
            let attempt = if problem.in_domain(&start) {
                solve_from(&problem, start, &corrector).ok()
            } else {
                None
            };
            match attempt {
                Some(sol) if sol.region_check => {
                    t = t_next;
                    a = a_next;
                    current = sol;
                    clean += 1;
                    if clean >= settings.growth_after {
                        step = (2.0 * step).min(settings.max_step);
                        clean = 0;
                    }
                }
                _ => {
                    step /= 2.0;
                    clean = 0;
                    if step < settings.min_step {
                        return Err(Error::StepFailure {
                            t,
                            min_step: settings.min_step,
                        });
                    }
                }
            }
        }
        samples.push(TraceSample {
            t: target,
            solution: current.clone(),
        });
    }
    Ok(CurveTrace {
        curve: curve.to_string(),
        curve_def: curve.clone(),
        eps: template.eps().map(<[u8]>::to_vec),
        m: template.m().to_vec(),
        samples,
    })
}
