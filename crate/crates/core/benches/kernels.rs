use std::hint::black_box;

use catmap::heisenberg::{build_propagator_with, PropagatorOptions, UnitarityCheck};
use catmap::{Backend, CatMap};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

const BACKENDS: [Backend; 2] = [Backend::Sequential, Backend::Parallel];

fn options(backend: Backend) -> PropagatorOptions {
    PropagatorOptions {
        backend,
        check: Some(UnitarityCheck::Skip),
        ..Default::default()
    }
}

fn build(c: &mut Criterion) {
    let map = CatMap::standard();
    let mut group = c.benchmark_group("propagator_build");
    group.sample_size(10);
    for n in [265usize, 989] {
        for backend in BACKENDS {
            group.bench_with_input(BenchmarkId::new(format!("{backend:?}"), n), &n, |b, &n| {
                b.iter(|| build_propagator_with(&map, black_box(n), &options(backend)).unwrap())
            });
        }
    }
    group.finish();
}

fn matvec(c: &mut Criterion) {
    let map = CatMap::standard();
    let n = 989;
    let x: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(1.0, i as f64)).collect();
    let mut group = c.benchmark_group("apply");
    for backend in BACKENDS {
        let p = build_propagator_with(&map, n, &options(backend)).unwrap();
        group.bench_function(BenchmarkId::new(format!("{backend:?}"), n), |b| {
            b.iter(|| p.apply(black_box(&x)))
        });
        group.bench_function(BenchmarkId::new(format!("{backend:?}-adjoint"), n), |b| {
            b.iter(|| p.apply_adjoint(black_box(&x)))
        });
    }
    group.finish();
}

fn unitarity(c: &mut Criterion) {
    let map = CatMap::standard();
    let n = 989;
    let mut group = c.benchmark_group("sampled_unitarity");
    group.sample_size(20);
    for backend in BACKENDS {
        let p = build_propagator_with(&map, n, &options(backend)).unwrap();
        group.bench_function(BenchmarkId::new(format!("{backend:?}"), n), |b| {
            b.iter(|| p.sampled_unitarity_defect(black_box(16)))
        });
    }
    group.finish();
}

criterion_group!(kernels, build, matvec, unitarity);
criterion_main!(kernels);
