use criterion::{BenchmarkId, Criterion};
use nbstein::ibd::verify_integral_identities;
use nbstein::numerics::integrate;
use nbstein::parasite::{appendix_check, battery_v1, compute_exposure};
use nbstein_bench::tight_quadrature;
use std::hint::black_box;

pub fn bench(c: &mut Criterion) {
    let spec = tight_quadrature();
    let mut group = c.benchmark_group("integrate");
    group.bench_function("gaussian_half_line", |b| {
        b.iter(|| integrate(|x: f64| (-x * x).exp(), 0.0, black_box(f64::INFINITY), &spec).unwrap())
    });
    group.bench_function("endpoint_singularity", |b| {
        b.iter(|| verify_integral_identities(black_box(0.9), &spec).unwrap())
    });
    for entry in battery_v1().scenarios.into_iter().filter(|e| e.name != "constant").take(3) {
        group.bench_with_input(BenchmarkId::new("exposure", &entry.name), &entry.scenario, |b, sc| {
            b.iter(|| compute_exposure(sc, &spec).unwrap())
        });
    }
    group.bench_function("appendix_theta_0.9", |b| b.iter(|| appendix_check(black_box(0.9), 1e-8).unwrap()));
    group.finish();
}
