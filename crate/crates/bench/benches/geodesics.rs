use std::f64::consts::{PI, TAU};

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use s3sr_bench::sample_target;
use s3sr_core::*;

fn integration(c: &mut Criterion) {
    let xi = Covector::at_identity(0.4, 1.3, 0.2);
    let opts = IntegrateOptions::default();
    c.bench_function("integrate 4pi", |b| {
        b.iter(|| integrate(&S3Point::IDENTITY, black_box(&xi), 4.0 * PI, &opts).unwrap())
    });
    let init = HyperPhaseState {
        xi1: 0.0,
        xi2: 0.0,
        eta: 0.5,
        psi1: 0.3,
        psi2: 0.2,
        theta: 0.1,
    };
    c.bench_function("integrate_hyper 2", |b| {
        b.iter(|| integrate_hyper(black_box(&init), 2.0, &opts).unwrap())
    });
}

fn connection(c: &mut Criterion) {
    let target = sample_target();
    let opts = EnumerateOptions {
        s_max: Some(TAU),
        ..Default::default()
    };
    c.bench_function("enumerate_between", |b| {
        b.iter(|| enumerate_between(black_box(&target), &opts).unwrap())
    });
    let oracle = BruteForceOptions {
        grid_step: 2e-3,
        s_max: TAU,
        b_max: None,
    };
    c.bench_function("brute_force_count", |b| {
        b.iter(|| brute_force_count(black_box(&target), &oracle).unwrap())
    });
    c.bench_function("enumerate_to_fiber", |b| b.iter(|| enumerate_to_fiber(black_box(1.0), 12).unwrap()));
}

fn lifting(c: &mut Criterion) {
    let curve = ParamCurve::projected_geodesic(GeodesicParam::at_identity(0.5, 0.1), TAU / 0.5f64.hypot(1.0), 200).unwrap();
    let opts = LiftOptions::default();
    c.bench_function("holonomy", |b| {
        b.iter(|| holonomy(black_box(&curve), &S3Point::IDENTITY, &opts).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = integration, connection, lifting
}
criterion_main!(benches);
