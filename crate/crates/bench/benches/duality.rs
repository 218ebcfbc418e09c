use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use effectdual::covariance::covariance_triangle;
use effectdual::duality::{duality_sides, povm_from_measurement, RecoveryConfig};
use effectdual::model::{dual_model_quantize, induced_povm};
use effectdual::suite::hidden_measurement;
use effectdual::{fixtures, ClassicalEffect, Tolerance};
use effectdual_bench::{model_workload, DualityWorkload};
use std::hint::black_box;

fn duality_square(c: &mut Criterion) {
    let mut group = c.benchmark_group("duality_sides");
    for dim in [2, 4, 6] {
        let w = DualityWorkload::new(dim, 8, 64, 7);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &w, |b, w| {
            b.iter(|| {
                for (rho, f) in w.states.iter().zip(&w.events) {
                    black_box(duality_sides(&w.povm, rho, f).expect("matching shapes"));
                }
            })
        });
    }
    group.finish();
}

fn recovery(c: &mut Criterion) {
    let mut group = c.benchmark_group("povm_from_measurement");
    for dim in [2, 4] {
        let w = DualityWorkload::new(dim, 5, 0, 3);
        let m = hidden_measurement(&w.povm);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &m, |b, m| {
            b.iter(|| povm_from_measurement(black_box(m), &RecoveryConfig::default()).expect("valid black box"))
        });
    }
    group.finish();
}

fn covariance(c: &mut Criterion) {
    let sys = fixtures::cyclic_system(6);
    c.bench_function("covariance_triangle/C6", |b| {
        b.iter(|| covariance_triangle(black_box(&sys), 20, Tolerance::default(), 0).expect("valid system"))
    });
}

fn models(c: &mut Criterion) {
    let model = model_workload(3, 3, 5);
    let povm = induced_povm(&model).expect("valid model");
    let f = ClassicalEffect::indicator(povm.space().clone(), 0);
    c.bench_function("induced_povm/3x3", |b| {
        b.iter(|| induced_povm(black_box(&model)).expect("valid model"))
    });
    c.bench_function("dual_model_quantize/3x3", |b| {
        b.iter(|| dual_model_quantize(black_box(&model), &f).expect("pointer space"))
    });
}

criterion_group!(benches, duality_square, recovery, covariance, models);
criterion_main!(benches);
