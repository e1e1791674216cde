//! Sequential vs rayon execution of the data-parallel loops.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use soft_gframe::verify::random::RandomModel;
use soft_gframe::verify::run_suite_with;
use soft_gframe::{Execution, ParameterSet, DEFAULT_FRAME_TOL};

const STRATEGIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn wide_model(n: usize, blocks: usize, params: usize) -> RandomModel {
    let dims = vec![n.div_ceil(2); blocks];
    RandomModel::new(7, n, dims, ParameterSet::indexed(params).unwrap()).unwrap()
}

fn frame_operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("frame_operator");
    for params in [8, 64] {
        let frame = wide_model(24, 12, params).instance(0);
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, params), &frame, |b, fr| {
                b.iter(|| exec.scope(|| fr.frame_operator_with(exec)))
            });
        }
    }
    group.finish();
}

fn bounds_and_exactness(c: &mut Criterion) {
    let mut group = c.benchmark_group("bounds_and_exactness");
    let frame = wide_model(16, 16, 16).instance(0);
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::new("frame_bounds", name), |b| {
            b.iter(|| exec.scope(|| frame.frame_bounds_with(DEFAULT_FRAME_TOL, exec)))
        });
        group.bench_function(BenchmarkId::new("is_exact", name), |b| {
            b.iter(|| exec.scope(|| frame.is_exact_with(DEFAULT_FRAME_TOL, exec).unwrap()))
        });
    }
    group.finish();
}

fn property_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("property_suite");
    group.sample_size(10).measurement_time(Duration::from_secs(10));
    let model = wide_model(6, 4, 3);
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| b.iter(|| run_suite_with(&model, 32, exec)));
    }
    group.finish();
}

criterion_group!(benches, frame_operator, bounds_and_exactness, property_suite);
criterion_main!(benches);
