use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ermakov_bench::{integrator, sample_expr, winternitz, winternitz_linear, winternitz_start};
use ermakov_core::integrate::integrate_polar;
use ermakov_core::invariant::lewis_ray_reid_polar;
use ermakov_core::linearize::{
    build_linear_ode, find_boundary, linear_config, reconstruct, solve_linear, PipelineOptions,
};
use ermakov_core::{BranchSign, PolarSystem};

fn expressions(c: &mut Criterion) {
    let e = sample_expr();
    c.bench_function("expr/eval", |b| b.iter(|| e.eval_at("theta", black_box(0.7)).unwrap()));
    c.bench_function("expr/differentiate", |b| {
        b.iter(|| black_box(&e).differentiate("theta"))
    });
}

fn direct(c: &mut Criterion) {
    let system = winternitz();
    let s0 = winternitz_start();
    let cfg = integrator(2.0);
    c.bench_function("integrate_polar/winternitz", |b| {
        b.iter(|| integrate_polar(&system, black_box(&s0), &cfg).unwrap())
    });
}

fn linear(c: &mut Criterion) {
    let spec = winternitz_linear();
    let s0 = winternitz_start();
    let invariant = lewis_ray_reid_polar(&s0, spec.potential()).unwrap().value;
    let branch = BranchSign::from_rate(s0.thetadot, s0.theta).unwrap();
    let lo = find_boundary(spec.potential(), invariant, s0.theta, 0.0)
        .unwrap()
        .map_or(0.0, |(t, _)| t);
    let hi = find_boundary(spec.potential(), invariant, s0.theta, 3.0)
        .unwrap()
        .map_or(3.0, |(t, _)| t);
    let domain = (lo + 1e-3, hi - 1e-3);
    let ode = build_linear_ode(&spec, invariant, branch, domain).unwrap();
    let cfg = linear_config();
    c.bench_function("solve_linear/winternitz", |b| {
        b.iter(|| solve_linear(&ode, s0.theta, 1.0, 0.0, domain, &cfg).unwrap())
    });

    let opts = PipelineOptions::default();
    c.bench_function("reconstruct/winternitz", |b| {
        b.iter(|| reconstruct(&spec, black_box(&s0), 0.5, &opts).unwrap())
    });
}

criterion_group!(benches, expressions, direct, linear);
criterion_main!(benches);
