use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use lamsa::bifurcation::{linspace, saddle_region_map};
use lamsa::equilibria::moving_fixed_point;
use lamsa::sim::{simulate, IntegratorConfig};
use lamsa::{Executor, SystemParams, SystemState};

const EXECUTORS: [(&str, Executor); 2] = [("sequential", Executor::Sequential), ("parallel", Executor::Parallel)];

fn region_map(c: &mut Criterion) {
    let params = SystemParams::default();
    let p_grid = linspace(0.0, 5.0, 101);
    let f_grid = linspace(-15.0, 0.0, 61);
    let mut group = c.benchmark_group("region_map_101x61");
    for (name, executor) in EXECUTORS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| saddle_region_map(&params, black_box(&p_grid), black_box(&f_grid), executor))
        });
    }
    group.finish();
}

fn fixed_point_sweep(c: &mut Criterion) {
    let params = SystemParams::default();
    let forces = linspace(-15.0, 0.0, 2001);
    let mut group = c.benchmark_group("fixed_point_sweep_2001");
    for (name, executor) in EXECUTORS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| executor.map_slice(black_box(&forces), |&f| moving_fixed_point(&params, f)))
        });
    }
    group.finish();
}

fn trajectory_bundle(c: &mut Criterion) {
    let params = SystemParams::default();
    let config = IntegratorConfig::default();
    let starts: Vec<SystemState> =
        linspace(0.5, 4.5, 32).into_iter().map(|p| SystemState::at_rest_on_manifold(&params, p).unwrap()).collect();
    let mut group = c.benchmark_group("trajectory_bundle_32");
    group.sample_size(10);
    for (name, executor) in EXECUTORS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| executor.map_slice(black_box(&starts), |x0| simulate(&params, *x0, -1.0, 2.0, &config)))
        });
    }
    group.finish();
}

criterion_group!(benches, region_map, fixed_point_sweep, trajectory_bundle);
criterion_main!(benches);
