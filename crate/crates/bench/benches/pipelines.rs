use criterion::{black_box, criterion_group, criterion_main, Criterion};

use coneharm::diophantine::{exclusion_check, pell_enumerate, to_candidates};
use coneharm::legendre::zeros_exact_bits;
use coneharm::niven::{solve, trace_curve, TraceSettings};
use coneharm::poly::dim_vanishing_space;
use coneharm::verify::family_grid;
use coneharm::{ConeParams, LegendreSpec, NivenProblem, RationalCurve};

fn corank(c: &mut Criterion) {
    let cone = ConeParams::parse("-1,4/3,4").unwrap();
    c.bench_function("corank d=3 N=8", |b| {
        b.iter(|| dim_vanishing_space(black_box(&cone), 8))
    });
    let cone4 = ConeParams::parse("-1,-2,3,6").unwrap();
    c.bench_function("corank d=4 N=6", |b| {
        b.iter(|| dim_vanishing_space(black_box(&cone4), 6))
    });
}

fn niven(c: &mut Criterion) {
    let p = NivenProblem::new(vec![-1.0, 1.0, 3.0], vec![1, 1, 0], vec![31, 13]).unwrap();
    c.bench_function("niven solve n=44", |b| {
        b.iter(|| solve(black_box(&p), 1e-9).unwrap())
    });
}

fn zeros(c: &mut Criterion) {
    let spec = LegendreSpec::new(90, 27).unwrap();
    c.bench_function("certified zeros P_90^27", |b| {
        b.iter(|| zeros_exact_bits(black_box(spec), 64).unwrap())
    });
}

fn exclusion(c: &mut Criterion) {
    let cand = to_candidates(&pell_enumerate(3)[2]).unwrap().remove(0);
    c.bench_function("exclusion (32, 90) at 256 bits", |b| {
        b.iter(|| exclusion_check(black_box(&cand), 256).unwrap())
    });
}

fn trace(c: &mut Criterion) {
    let curve = RationalCurve::cone_family(1.into());
    let template = NivenProblem::new(vec![-1.0, 1.0, 3.0], vec![1, 1, 0], vec![31, 13]).unwrap();
    let grid = family_grid();
    let mut group = c.benchmark_group("continuation");
    group.sample_size(10);
    group.bench_function("family trace 202 points", |b| {
        b.iter(|| {
            trace_curve(
                &curve,
                &template,
                black_box(&grid),
                &TraceSettings::default(),
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, corank, niven, zeros, exclusion, trace);
criterion_main!(benches);
