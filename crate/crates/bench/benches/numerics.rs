use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::Vector3;

use ssc_core::bath::{BathSpec, RedfieldCoefficients};
use ssc_core::dynamics::CoefficientCache;
use ssc_core::positivity::gks_decompose;
use ssc_core::redfield::{Mode, SystemSpec};
use ssc_core::steady::{Order, SteadyKernel};
use ssc_core::{CoefficientModel, DynamicsOptions, Propagator};

fn bath() -> BathSpec {
    BathSpec::new(0.01, 1.0, 10.0, 1.0).unwrap()
}

fn coefficients(c: &mut Criterion) {
    let b = bath();
    c.bench_function("asymptotic_coefficients", |bench| {
        bench.iter(|| RedfieldCoefficients::asymptotic(black_box(&b), 1.0).unwrap())
    });
    c.bench_function("finite_time_coefficients", |bench| {
        bench.iter(|| RedfieldCoefficients::finite_time(black_box(&b), 1.0, 25.0).unwrap())
    });
}

fn steady(c: &mut Criterion) {
    let kernel = SteadyKernel::new(&bath(), 1.0).unwrap();
    let system = SystemSpec::unit(1.0, 1.0).unwrap();
    c.bench_function("closed_form", |bench| {
        bench.iter(|| kernel.closed_form(black_box(&system), 0.01, Order::Exact).unwrap())
    });
    c.bench_function("linear_solve", |bench| {
        bench.iter(|| kernel.linear_solve(black_box(&system), 0.01, Mode::NonSecular).unwrap())
    });
    let gen = kernel.generator(&system, 0.01, Mode::NonSecular).unwrap();
    c.bench_function("gks_decompose", |bench| bench.iter(|| gks_decompose(black_box(&gen)).unwrap()));
}

fn dynamics(c: &mut Criterion) {
    let b = bath();
    let mut group = c.benchmark_group("dynamics");
    group.sample_size(10);
    group.bench_function("coefficient_cache", |bench| bench.iter(|| CoefficientCache::new(black_box(&b), 1.0).unwrap()));
    let p = Propagator::new(&SystemSpec::unit(1.0, 1.0).unwrap(), &b, Mode::NonSecular, CoefficientModel::Asymptotic)
        .unwrap();
    let v0 = Vector3::new(0.0, 0.0, 1.0);
    group.bench_function("evolve_constant", |bench| {
        bench.iter(|| p.evolve(black_box(&v0), 200.0, &DynamicsOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, coefficients, steady, dynamics);
criterion_main!(benches);
