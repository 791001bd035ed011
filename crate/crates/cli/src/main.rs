use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Rational;
use serde_json::json;

use coneharm::diophantine::{exclusion_check, pell_enumerate, to_candidates};
use coneharm::harmonics::build_q;
use coneharm::legendre::{wkb_sweep, wkb_sweep_csv, zero_table_csv, zeros_exact_bits};
use coneharm::niven::{solve, trace_curve, TraceSettings};
use coneharm::poly::dim_vanishing_space;
use coneharm::real::with_precision;
use coneharm::verify::{run_criterion, TITLES};
use coneharm::{ConeParams, Error, LegendreSpec, Mp, NivenProblem, RationalCurve, Real};

#[derive(Parser, Debug)]
#[command(
    name = "coneharm",
    version,
    about = "Harmonic polynomials on quadratic cones"
)]
struct Cli {
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Working precision in bits. Values above 53 switch the floating-point
    /// pipelines to MPFR.
    #[arg(long, global = true, env = "CONEHARM_PRECISION")]
    precision: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact dimension of the degree-N harmonics vanishing on the cone.
    Dim {
        /// Cone parameters as integers or num/den fractions.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// Degree, or a comma-separated list of degrees.
        #[arg(long = "N", value_delimiter = ',', required = true)]
        degrees: Vec<u32>,
    },
    /// Solve Niven's equations for one (ε, m).
    Solve {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Continue a solution along the cone family (−1, 2/(c+t), 2/(c−t)).
    Trace {
        #[command(flatten)]
        index: IndexArgs,
        /// Number of grid points.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 0.01)]
        t_start: f64,
        #[arg(long, default_value_t = 0.99)]
        t_end: f64,
        /// The shift c of the family.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        shift: String,
        /// Corrector tolerance; defaults to 1e-8 in double precision and
        /// 1e-12 otherwise.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Expand the conic harmonic of one (ε, m) into monomials.
    Harmonic {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Certified enclosures of the positive zeros of P_ell^m.
    LegendreZeros {
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        m: u32,
        /// Enclosure width 2^-bits.
        #[arg(long, default_value_t = 64)]
        bits: u32,
    },
    /// Normalised P_ell^m against its WKB approximation and error bounds.
    WkbSweep {
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 2000)]
        points: usize,
    },
    /// Solutions of p² − 32q² = −7 in increasing order.
    Pell {
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
    /// Exclusion reports for the first nontrivial Pell candidates.
    Exclude {
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
    /// Run the acceptance criteria and print a pass/fail table.
    VerifyAll {
        /// Only these criteria (1-12).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Args, Debug)]
struct IndexArgs {
    /// Parity vector, e.g. 1,1,0.
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<u8>,
    /// Zero counts per gap, e.g. 31,13.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_)
            | Error::DegreeTooSmall { .. }
            | Error::DomainViolation(_)
            | Error::PreconditionViolation(_)
            | Error::IndexOutOfRange { .. }
            | Error::InterlacingViolation
            | Error::MixedDegrees(..)
            | Error::Infeasible(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Artifact text plus whether the run itself counts as a failure.
struct Output {
    text: String,
    failed: bool,
}

impl From<String> for Output {
    fn from(text: String) -> Self {
        Output {
            text,
            failed: false,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|out| emit(&cli, out)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(cli: &Cli, out: Output) -> Result<ExitCode, Failure> {
    let mut text = out.text;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cli.out {
        Some(path) => fs::write(path, &text).map_err(|e| Failure {
            code: 1,
            message: format!("cannot write {}: {e}", path.display()),
        })?,
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
        }
    }
    Ok(if out.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let bits = cli.precision.unwrap_or(53);
    if let Some(p) = cli.precision {
        if !(24..=1 << 16).contains(&p) {
            return Err(invalid(format!(
                "precision must lie in 24..=65536 bits, got {p}"
            )));
        }
    }
    let fmt = cli.format;
    match &cli.command {
        Command::Dim { a, degrees } => dim(a, degrees, fmt).map(Into::into),
        Command::Solve { index, a, tol } => {
            let a = parse_reals(a)?;
            if bits > 53 {
                with_precision(bits, || solve_cmd::<Mp>(&a, index, *tol, fmt))
            } else {
                solve_cmd::<f64>(&a, index, *tol, fmt)
            }
            .map(Into::into)
        }
        Command::Trace {
            index,
            grid,
            t_start,
            t_end,
            shift,
            tol,
        } => {
            let grid = linspace(*t_start, *t_end, *grid)?;
            let shift = parse_rational(shift)?;
            if bits > 53 {
                let tol = tol.unwrap_or(1e-12);
                with_precision(bits, || trace_cmd::<Mp>(index, &grid, shift, tol, fmt))
            } else {
                trace_cmd::<f64>(index, &grid, shift, tol.unwrap_or(1e-8), fmt)
            }
            .map(Into::into)
        }
        Command::Harmonic { index, a, tol } => {
            if fmt == Some(Format::Csv) {
                return Err(invalid("harmonic output is JSON only"));
            }
            let a: Vec<f64> = parse_reals(a)?.iter().map(Rational::to_f64).collect();
            let problem = NivenProblem::new(a, index.eps.clone(), index.m.clone())?;
            let sol = solve(&problem, *tol)?;
            let q = build_q(&problem, &sol)?;
            Ok(pretty(&q.to_json()).into())
        }
        Command::LegendreZeros { ell, m, bits } => {
            let spec = LegendreSpec::new(*ell, *m)?;
            let zeros = zeros_exact_bits(spec, *bits)?;
            Ok(match fmt.unwrap_or(Format::Csv) {
                Format::Csv => zero_table_csv(&[(spec, zeros)]),
                Format::Json => pretty(&json!({ "ell": ell, "m": m, "zeros": zeros })),
            }
            .into())
        }
        Command::WkbSweep { ell, m, points } => {
            let spec = LegendreSpec::new(*ell, *m)?;
            if ell == m {
                return Err(invalid("the sweep needs ell > m"));
            }
            if *points == 0 {
                return Err(invalid("--points must be positive"));
            }
            let rows = wkb_sweep(spec, *points);
            Ok(match fmt.unwrap_or(Format::Csv) {
                Format::Csv => wkb_sweep_csv(&rows),
                Format::Json => pretty(&json!({ "ell": ell, "m": m, "rows": rows })),
            }
            .into())
        }
        Command::Pell { count } => {
            let sols = pell_enumerate(*count);
            Ok(match fmt.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut s = String::from("p,q,alpha,sigma\n");
                    for x in &sols {
                        s.push_str(&format!("{},{},{},{}\n", x.p, x.q, x.alpha, x.sigma));
                    }
                    s
                }
                Format::Json => pretty(&serde_json::to_value(&sols).expect("serialisable")),
            }
            .into())
        }
        Command::Exclude { count } => exclude(*count, cli.precision.unwrap_or(256), fmt),
        Command::VerifyAll { only } => verify_all(only, fmt),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("serialisable")
}

fn parse_rational(tok: &str) -> Result<Rational, Failure> {
    let tok = tok.trim();
    let bad = || invalid(format!("'{tok}' is not an integer or num/den fraction"));
    match tok.split_once('/') {
        Some((n, d)) => {
            let n: rug::Integer = n.trim().parse().map_err(|_| bad())?;
            let d: rug::Integer = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(invalid(format!("'{tok}' has zero denominator")));
            }
            Ok(Rational::from((n, d)))
        }
        None => tok
            .parse::<rug::Integer>()
            .map(Rational::from)
            .map_err(|_| bad()),
    }
}

/// Integers, fractions or decimals. Decimals are taken at their exact
/// binary value.
fn parse_reals(s: &str) -> Result<Vec<Rational>, Failure> {
    s.split(',')
        .map(|tok| {
            parse_rational(tok).or_else(|_| {
                tok.trim()
                    .parse::<f64>()
                    .ok()
                    .and_then(Rational::from_f64)
                    .ok_or_else(|| invalid(format!("'{}' is not a number", tok.trim())))
            })
        })
        .collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, Failure> {
    if n < 2 {
        return Err(invalid("--grid needs at least two points"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!("need t-start < t-end, got {lo} and {hi}")));
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

fn dim(a: &str, degrees: &[u32], fmt: Option<Format>) -> Result<String, Failure> {
    let cone = ConeParams::parse(a)?;
    cone.require_distinct()?;
    let dims: Vec<(u32, usize)> = degrees
        .iter()
        .map(|&n| (n, dim_vanishing_space(&cone, n)))
        .collect();
    Ok(match fmt {
        None => dims.iter().map(|(_, d)| format!("{d}\n")).collect(),
        Some(Format::Csv) => {
            let mut s = String::from("N,dim\n");
            for (n, d) in &dims {
                s.push_str(&format!("{n},{d}\n"));
            }
            s
        }
        Some(Format::Json) => {
            let a: Vec<String> = cone.values().iter().map(Rational::to_string).collect();
            let rows: Vec<_> = dims
                .iter()
                .map(|(n, d)| json!({ "N": n, "dim": d }))
                .collect();
            pretty(&json!({ "a": a, "dims": rows }))
        }
    })
}

fn solve_cmd<R: Real>(
    a: &[Rational],
    index: &IndexArgs,
    tol: f64,
    fmt: Option<Format>,
) -> Result<String, Failure> {
    let a: Vec<R> = a.iter().map(R::from_rational).collect();
    let problem = NivenProblem::new(a, index.eps.clone(), index.m.clone())?;
    let sol = solve(&problem, tol)?;
    Ok(match fmt.unwrap_or(Format::Json) {
        Format::Json => pretty(&json!({
            "a": problem.a().iter().map(R::to_f64).collect::<Vec<_>>(),
            "epsilon": index.eps,
            "m": index.m,
            "solution": sol,
        })),
        Format::Csv => {
            let mut s = String::from("k,xi\n");
            for (k, x) in sol.xi.iter().enumerate() {
                s.push_str(&format!("{},{:?}\n", k + 1, x));
            }
            s
        }
    })
}

fn trace_cmd<R: Real>(
    index: &IndexArgs,
    grid: &[f64],
    shift: Rational,
    tol: f64,
    fmt: Option<Format>,
) -> Result<String, Failure> {
    let curve = RationalCurve::cone_family(shift);
    let a0 = curve.eval::<R>(&R::from_f64(grid[0]))?;
    let template = NivenProblem::new(a0, index.eps.clone(), index.m.clone())?;
    let trace = trace_curve(&curve, &template, grid, &TraceSettings::with_tol(tol))?;
    Ok(match fmt.unwrap_or(Format::Csv) {
        Format::Csv => trace.to_csv(),
        Format::Json => trace.to_json(),
    })
}

fn exclude(count: usize, bits: u32, fmt: Option<Format>) -> Result<Output, Failure> {
    if count == 0 {
        return Err(invalid("--count must be positive"));
    }
    let mut reports = Vec::new();
    let mut sols = pell_enumerate(count + 8);
    let mut i = 0;
    while reports.len() < count {
        if i == sols.len() {
            sols = pell_enumerate(2 * sols.len());
        }
        for c in to_candidates(&sols[i])? {
            if !c.is_trivial() && reports.len() < count {
                reports.push(exclusion_check(&c, bits)?);
            }
        }
        i += 1;
    }
    let failed = reports.iter().any(|r| !r.excluded);
    let text = match fmt.unwrap_or(Format::Json) {
        Format::Json => pretty(&serde_json::Value::Array(
            reports.iter().map(|r| r.to_json()).collect(),
        )),
        Format::Csv => {
            let mut s = String::from("p,q,m1,m2,eps,k0,N,nu,phase_bound,quotient_phase,zero_phase_bound,margin,excluded\n");
            for r in &reports {
                s.push_str(&format!(
                    "{},{},{},{},{}{}{},{},{},{:?},{:?},{:?},{:?},{:?},{}\n",
                    r.p,
                    r.q,
                    r.m[0],
                    r.m[1],
                    r.eps[0],
                    r.eps[1],
                    r.eps[2],
                    r.k0,
                    r.degree,
                    r.nu,
                    r.phase_bound,
                    r.quotient_phase,
                    r.zero_phase_bound,
                    r.margin,
                    r.excluded
                ));
            }
            s
        }
    };
    Ok(Output { text, failed })
}

fn verify_all(only: &[u8], fmt: Option<Format>) -> Result<Output, Failure> {
    if let Some(bad) = only
        .iter()
        .find(|&&id| !(1..=TITLES.len() as u8).contains(&id))
    {
        return Err(invalid(format!(
            "criterion {bad} does not exist (1-{})",
            TITLES.len()
        )));
    }
    let ids: Vec<u8> = if only.is_empty() {
        (1..=TITLES.len() as u8).collect()
    } else {
        only.to_vec()
    };
    let results: Vec<_> = ids
        .iter()
        .map(|&id| {
            let r = run_criterion(id);
            eprintln!("{r}");
            r
        })
        .collect();
    let failed = results.iter().any(|r| !r.passed);
    let text = match fmt {
        Some(Format::Json) => pretty(&serde_json::to_value(&results).expect("serialisable")),
        Some(Format::Csv) => {
            let mut s = String::from("id,title,passed,seconds\n");
            for r in &results {
                s.push_str(&format!(
                    "{},{},{},{:.3}\n",
                    r.id, r.title, r.passed, r.seconds
                ));
            }
            s
        }
        None => {
            let mut s = String::new();
            for r in &results {
                s.push_str(&format!(
                    "{:>2}  {}  {}\n",
                    r.id,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.title
                ));
            }
            let passed = results.iter().filter(|r| r.passed).count();
            s.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
            s
        }
    };
    Ok(Output { text, failed })
}
