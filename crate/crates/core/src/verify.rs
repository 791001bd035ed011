//! End-to-end acceptance checks, shared by the test suite and the CLI.

use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Rational;
use serde::Serialize;

use crate::diophantine::{exclusion_check, pell_enumerate, quotient_bound, to_candidates};
use crate::harmonics::{
    build_q, enumerate_indices, expand_exact, harmonic_for, rational_solution, sphere_gram,
};
use crate::legendre::{phase_gaps, wkb_sweep, zeros_exact};
use crate::niven::{
    asymptotic_t0, asymptotic_t1, derivative_at_t1, derivative_constant, is_positive_definite,
    miracle_check, solve, trace_curve, two_band_closed_form, CurveTrace, NivenProblem,
    RationalCurve, TraceSettings,
};
use crate::poly::{dim_vanishing_space, recursion_residuals, taylor_recursion, OperatorSeries};
use crate::real::with_precision;
use crate::{ConeParams, HomogeneousPoly, LegendreSpec, Mp, Real, Result};

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {:<28} {:>7.2}s  {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.seconds,
            self.detail
        )
    }
}

pub const TITLES: [&str; 12] = [
    "generic dimension pattern",
    "non-generic witness",
    "Niven solver contract",
    "harmonicity",
    "branch family reproduction",
    "endpoint asymptotics",
    "derivative at t = 1",
    "WKB bounds",
    "Pell pipeline",
    "exclusion reproduction",
    "orthogonality",
    "perturbation recursion",
];

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: u8) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => generic_dimensions(),
        2 => non_generic_witness(),
        3 => solver_contract(),
        4 => harmonicity(),
        5 => branch_family(),
        6 => endpoint_asymptotics(),
        7 => derivative_at_endpoint(),
        8 => wkb_bounds(),
        9 => pell_pipeline(),
        10 => exclusion_reproduction(),
        11 => orthogonality(),
        12 => perturbation_recursion(),
        _ => Err(crate::Error::InvalidInput(format!("no criterion {id}"))),
    };
    let (passed, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        title: TITLES.get(id as usize - 1).copied().unwrap_or("unknown"),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Every criterion in order.
pub fn verify_all() -> Vec<CriterionResult> {
    (1..=12).map(run_criterion).collect()
}

type Outcome = Result<(bool, String)>;

fn generic_dimensions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cases: Vec<(ConeParams, Vec<(u32, usize)>)> = Vec::new();
    for _ in 0..20 {
        let a = ConeParams::random_harmonic(3, &mut rng);
        let expect = [
            (1, 0),
            (2, 1),
            (3, 0),
            (4, 0),
            (5, 1),
            (6, 0),
            (7, 0),
            (8, 0),
        ];
        cases.push((a, expect.to_vec()));
    }
    for _ in 0..5 {
        let a = ConeParams::random_harmonic(4, &mut rng);
        let expect = [(2, 1), (3, 0), (4, 0), (5, 0), (6, 1), (7, 0)];
        cases.push((a, expect.to_vec()));
    }
    let failures: Vec<String> = cases
        .par_iter()
        .flat_map_iter(|(a, expect)| {
            expect.iter().filter_map(move |&(n, want)| {
                let got = dim_vanishing_space(a, n);
                (got != want).then(|| format!("a = {a}, N = {n}: dim {got}, expected {want}"))
            })
        })
        .collect();
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            "20 cones in dimension 3 and 5 in dimension 4 match".into()
        } else {
            failures.join("; ")
        },
    ))
}

fn non_generic_witness() -> Outcome {
    let a = ConeParams::parse("1,1,1,-1/3")?;
    let dims: Vec<(u32, usize)> = (2..=10).map(|n| (n, dim_vanishing_space(&a, n))).collect();
    let excess: Vec<u32> = dims
        .iter()
        .filter(|&&(n, d)| n != 2 && n != 6 && d >= 1)
        .map(|&(n, _)| n)
        .collect();
    Ok((
        !excess.is_empty(),
        format!(
            "dims for N = 2..10: {:?}; excess at N = {excess:?}",
            dims.iter().map(|d| d.1).collect::<Vec<_>>()
        ),
    ))
}

fn small_cone() -> Vec<f64> {
    vec![-1.0, 4.0 / 3.0, 4.0]
}

fn small_cases() -> Vec<(Vec<u8>, Vec<usize>)> {
    (1..=14).flat_map(|n| enumerate_indices(3, n)).collect()
}

fn solver_contract() -> Outcome {
    let cases = small_cases();
    let results: Vec<Result<(f64, bool)>> = cases
        .par_iter()
        .map(|(eps, m)| {
            let p = NivenProblem::new(small_cone(), eps.clone(), m.clone())?;
            let s = solve(&p, 1e-12)?;
            let pd = p.n() == 0 || is_positive_definite(&p.potential(&s.xi)?.hessian);
            Ok((s.residual_inf, pd && s.region_check))
        })
        .collect();
    let mut worst = 0.0f64;
    let mut ok = true;
    for r in results {
        let (res, pd) = r?;
        worst = worst.max(res);
        ok &= pd && res <= 1e-12;
    }
    let pairs: Vec<(usize, u8)> = (1..=40).flat_map(|n| [(n, 0u8), (n, 1u8)]).collect();
    let identity: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(n, e)| {
            with_precision(128, || {
                let p = NivenProblem::new(
                    vec![Mp::from_i64(-1), Mp::from_i64(1)],
                    vec![e, e],
                    vec![n],
                )?;
                let s = solve(&p, 1e-30)?;
                let (rv, rw) = miracle_check(&s.xi, &Mp::from_i64(1 + 2 * e as i64))?;
                let exact = two_band_closed_form::<Mp>(n, e, e);
                let dev =
                    s.xi.iter()
                        .zip(&exact)
                        .map(|(x, y)| (x.clone() - y.clone()).abs().to_f64())
                        .fold(0.0, f64::max);
                Ok(rv.to_f64().max(rw.to_f64()).max(dev))
            })
        })
        .collect();
    let mut worst_identity = 0.0f64;
    for r in identity {
        worst_identity = worst_identity.max(r?);
    }
    ok &= worst_identity <= 1e-10;
    Ok((
        ok,
        format!(
            "{} cases, max residual {worst:.1e}, Hessians positive definite; pairwise identities for n ≤ 40, δ ∈ {{1,3}}: max {worst_identity:.1e}",
            cases.len()
        ),
    ))
}

fn harmonicity() -> Outcome {
    let cases = small_cases();
    let a_exact = ConeParams::parse("-1,4/3,4")?;
    let quadric = a_exact.quadric();
    let results: Vec<Result<(f64, Option<bool>)>> = cases
        .par_iter()
        .map(|(eps, m)| {
            let h = harmonic_for(&small_cone(), eps, m, 1e-12)?;
            let res = h.laplacian_residual();
            let divides = if h.xi.xi.iter().any(|x| x.abs() < 1e-9) {
                Some(match rational_solution(&a_exact, eps, &h.xi.xi) {
                    Some(xi) => {
                        let q = expand_exact(&a_exact, eps, &xi);
                        q.laplacian().is_zero() && q.div_rem(&quadric).1.is_zero()
                    }
                    None => {
                        let (_, rem) = h.expanded.div_rem(&quadric.to_f64());
                        rem.max_abs_coeff() <= 1e-9 * h.expanded.max_abs_coeff()
                    }
                })
            } else {
                None
            };
            Ok((res, divides))
        })
        .collect();
    let mut worst = 0.0f64;
    let mut zero_cases = 0;
    let mut ok = true;
    for r in results {
        let (res, div) = r?;
        worst = worst.max(res);
        if let Some(d) = div {
            zero_cases += 1;
            ok &= d;
        }
    }
    ok &= worst <= 1e-9;
    Ok((
        ok,
        format!("max relative Laplacian {worst:.1e} over {} cases; {zero_cases} cases with ξ = 0 divisible by K_a", cases.len()),
    ))
}

pub const FAMILY_EPS: [u8; 3] = [1, 1, 0];
pub const FAMILY_M: [usize; 2] = [31, 13];

/// 200 points from 0.01 to 0.99 plus the two points used for the derivative.
pub fn family_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..200).map(|i| 0.01 + 0.98 * i as f64 / 199.0).collect();
    g.extend([0.995, 0.999]);
    g
}

/// The `(1,1,0)`, `(31,13)` branch family along `(−1, 2/(1+t), 2/(1−t))`,
/// computed once per process.
pub fn family_trace() -> Result<&'static CurveTrace> {
    static TRACE: OnceLock<std::result::Result<CurveTrace, String>> = OnceLock::new();
    TRACE
        .get_or_init(|| {
            let curve = RationalCurve::cone_family(Rational::from(1));
            let template =
                NivenProblem::new(vec![-1.0, 1.0, 3.0], FAMILY_EPS.to_vec(), FAMILY_M.to_vec())
                    .map_err(|e| e.to_string())?;
            trace_curve(&curve, &template, &family_grid(), &TraceSettings::default())
                .map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(|e| crate::Error::InvalidInput(format!("family trace failed: {e}")))
}

fn sample_at(trace: &CurveTrace, t: f64) -> Result<&[f64]> {
    trace
        .samples
        .iter()
        .find(|s| (s.t - t).abs() < 1e-12)
        .map(|s| s.solution.xi.as_slice())
        .ok_or_else(|| crate::Error::InvalidInput(format!("no sample at t = {t}")))
}

fn branch_family() -> Outcome {
    let trace = family_trace()?;
    let first = sample_at(trace, 0.01)?[15];
    let last = sample_at(trace, 0.99)?[15];
    let ordered =
        trace.respects_domain() && trace.samples.iter().all(|s| s.solution.xi.len() == 44);
    Ok((
        last.abs() <= 0.05 && first < 0.0 && ordered,
        format!(
            "ξ₁₆(0.01) = {first:.5}, ξ₁₆(0.99) = {last:.2e}, {} samples inside D_m: {ordered}",
            trace.samples.len()
        ),
    ))
}

fn endpoint_asymptotics() -> Outcome {
    let trace = family_trace()?;
    let zeros = zeros_exact(LegendreSpec::new(90, 27)?, 1e-20)?;
    let start = sample_at(trace, 0.01)?;
    let end = sample_at(trace, 0.99)?;
    let near_zero = (0..31)
        .map(|k| {
            let z = zeros[k].midpoint_f64();
            (start[k] - (-1.0 + 3.0 * z * z)).abs()
        })
        .fold(0.0, f64::max);
    let near_one = (0..31)
        .map(|k| (end[k] + ((2 * k + 2) as f64 * std::f64::consts::PI / 64.0).cos()).abs())
        .fold(0.0, f64::max);
    // Which phase offset of the fast branches the traced slopes follow.
    let pred = asymptotic_t0(&FAMILY_EPS, &FAMILY_M)?;
    let slope_err = |c: &[f64]| {
        (0..13)
            .map(|i| ((start[31 + i] - 2.0) / 0.01 - c[i]).abs())
            .fold(0.0, f64::max)
    };
    let (e2, e3) = (slope_err(&pred.slopes), slope_err(&pred.slopes_alt));
    let pole = asymptotic_t1(&FAMILY_EPS, &FAMILY_M)?;
    let late = sample_at(trace, 0.999)?;
    let pole_err = pole
        .residues
        .iter()
        .enumerate()
        .map(|(i, r)| ((1.0 - 0.999) * late[31 + i] - r).abs() / r.abs())
        .fold(0.0, f64::max);
    Ok((
        near_zero <= 0.02 && near_one <= 0.05,
        format!(
            "t = 0.01: {near_zero:.2e}, t = 0.99: {near_one:.2e}; slope error ε₂ {e2:.3} vs ε₃ {e3:.3}; pole residues {pole_err:.1e}"
        ),
    ))
}

fn derivative_at_endpoint() -> Outcome {
    let trace = family_trace()?;
    let closed = derivative_at_t1(&FAMILY_EPS, &FAMILY_M)?;
    let limits = asymptotic_t1(&FAMILY_EPS, &FAMILY_M)?.limits;
    let (h1, h2) = (0.005, 0.001);
    let x1 = sample_at(trace, 1.0 - h1)?;
    let x2 = sample_at(trace, 1.0 - h2)?;
    let mut worst = 0.0f64;
    for k in 0..31 {
        let d1 = (limits[k] - x1[k]) / h1;
        let d2 = (limits[k] - x2[k]) / h2;
        let extrapolated = (h1 * d2 - h2 * d1) / (h1 - h2);
        worst = worst.max((extrapolated - closed[k]).abs());
    }
    // ξ'₁₆(1) = 0, so errors are measured against the largest derivative.
    let scale = closed.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rel = worst / scale;
    Ok((
        rel <= 1e-3,
        format!(
            "K = {}, relative error {rel:.2e}",
            derivative_constant(&FAMILY_EPS, &FAMILY_M)?
        ),
    ))
}

fn wkb_bounds() -> Outcome {
    let specs: Vec<LegendreSpec> = (1..=60u32)
        .flat_map(|l| (0..=l).map(move |m| LegendreSpec::new(l, m).expect("m ≤ ℓ")))
        .collect();
    let results: Vec<Result<(bool, f64, f64)>> = specs
        .par_iter()
        .map(|&spec| {
            let rows = wkb_sweep(spec, 2000);
            let sweep_ok = rows.iter().all(|r| r.dominated());
            let ratio = rows
                .iter()
                .map(|r| r.err / r.bound_direct.min(r.bound_phase_form))
                .fold(0.0, f64::max);
            let mut gap_ratio = 0.0f64;
            let mut gaps_ok = true;
            if spec.zero_count() > 0 {
                let zeros = zeros_exact(spec, 1e-20)?;
                for g in phase_gaps(spec, &zeros)? {
                    gaps_ok &= g.within_bound();
                    gap_ratio = gap_ratio.max(g.gap / g.bound);
                }
            }
            Ok((sweep_ok && gaps_ok, ratio, gap_ratio))
        })
        .collect();
    let mut ok = true;
    let (mut worst_sweep, mut worst_gap) = (0.0f64, 0.0f64);
    for r in results {
        let (good, s, g) = r?;
        ok &= good;
        worst_sweep = worst_sweep.max(s);
        worst_gap = worst_gap.max(g);
    }
    Ok((
        ok,
        format!(
            "{} (ℓ, m) pairs; max error/bound {worst_sweep:.3}, max zero phase gap/bound {worst_gap:.3}",
            specs.len()
        ),
    ))
}

fn pell_pipeline() -> Outcome {
    let sols = pell_enumerate(6);
    let qs: Vec<u64> = sols.iter().filter_map(|s| s.q.to_u64()).collect();
    let mut ok = qs == [1, 2, 32, 67, 1087, 2276];
    let cands: Vec<_> = sols
        .iter()
        .map(|s| to_candidates(s).map(|mut v| v.remove(0)))
        .collect::<Result<_>>()?;
    ok &= (cands[0].m, cands[0].eps) == ([1, 0], [0, 0, 0]);
    ok &= (cands[1].m, cands[1].eps) == ([1, 0], [1, 1, 1]);
    ok &= (cands[2].m, cands[2].eps, cands[2].k0) == ([31, 13], [1, 1, 0], 16);
    ok &= (cands[3].m[0] + cands[3].eps[0] as u64, cands[3].degree) == (67, 189);
    let limit = Rational::from((33, 180));
    let mut checked = 0;
    for s in pell_enumerate(64).into_iter().skip(2) {
        if s.q > 1_000_000 {
            break;
        }
        let c = to_candidates(&s)?.remove(0);
        ok &= c.satisfies_pell() && quotient_bound(&c) <= limit && c.nu_below_bound();
        checked += 1;
    }
    Ok((
        ok,
        format!(
            "q = {qs:?}; quotient ≤ 33/180 and ν < 0.304 for {checked} candidates with q ≤ 10⁶"
        ),
    ))
}

fn exclusion_reproduction() -> Outcome {
    let sols = pell_enumerate(6);
    let reports: Vec<_> = sols[2..]
        .par_iter()
        .map(|s| exclusion_check(&to_candidates(s)?.remove(0), 256))
        .collect::<Result<_>>()?;
    let r = &reports[0];
    let mut ok = r.nu < 0.304
        && r.theta_nu_bound >= 0.5818
        && r.phase_bound <= 33.0 / 180.0 * std::f64::consts::PI
        && r.zero_phase_bound <= 0.002
        && r.margin >= 0.003
        && r.excluded
        && r.zero_below_target == Some(true);
    ok &= reports[1..].iter().all(|r| r.excluded && r.margin > 0.0);
    let margins: Vec<String> = reports.iter().map(|r| format!("{:.4}", r.margin)).collect();
    Ok((
        ok,
        format!(
            "(32, 90): ν = {:.4}, ϑ at ν-bound {:.4}, phase {:.4}, zero-phase bound {:.1e}, zero below 1/√3: {:?}; margins {}",
            r.nu,
            r.theta_nu_bound,
            r.phase_bound,
            r.zero_phase_bound,
            r.zero_below_target,
            margins.join(", ")
        ),
    ))
}

fn orthogonality() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [5usize, 8] {
        let hs = enumerate_indices(3, n)
            .into_iter()
            .map(|(e, m)| {
                let p = NivenProblem::new(small_cone(), e, m)?;
                let s = solve(&p, 1e-13)?;
                build_q(&p, &s)
            })
            .collect::<Result<Vec<_>>>()?;
        let g = sphere_gram(&hs, 2 * n + 2)?;
        let r = g.max_offdiag_ratio();
        ok &= r <= 1e-8;
        parts.push(format!(
            "N = {n}: {} harmonics, max off-diagonal ratio {r:.1e}",
            hs.len()
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn perturbation_recursion() -> Outcome {
    let a = ConeParams::parse("-1,4/3,4")?;
    let seed = HomogeneousPoly::monomial(vec![1, 1, 1], Rational::from(1));
    let flat = OperatorSeries::laplacian(3);
    let qs = taylor_recursion(&a, &flat, &seed, 7)?;
    let mut ok = qs[1].is_zero() && qs[2].is_zero() && qs[3] == seed;
    ok &= qs[4..].iter().all(HomogeneousPoly::is_zero);
    ok &= recursion_residuals(&a, &flat, &qs)
        .iter()
        .all(HomogeneousPoly::is_zero);
    let series = flat.with_zeroth(0, HomogeneousPoly::constant(3, Rational::from(1)))?;
    let qs = taylor_recursion(&a, &series, &seed, 7)?;
    let exact = recursion_residuals(&a, &series, &qs)
        .iter()
        .all(HomogeneousPoly::is_zero);
    let nonzero: Vec<usize> = (0..qs.len()).filter(|&l| !qs[l].is_zero()).collect();
    ok &= exact;
    Ok((
        ok,
        format!("unperturbed: seed propagated unchanged; c₀ = 1: exact residuals through order 7, nonzero orders {nonzero:?}"),
    ))
}
