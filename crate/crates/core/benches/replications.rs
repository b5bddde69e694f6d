//! Sequential versus rayon replications, plus the analytical solvers for scale.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ibfd_dcf::experiment::{builtin, run_experiment};
use ibfd_dcf::hd::solve_hd;
use ibfd_dcf::ibfd::solve_ibfd;
use ibfd_dcf::sim::{run_replications, Execution, Horizon, Scenario};
use ibfd_dcf::{AggregationMode, BackoffParams, RhoSpec, SolverOptions};

fn executors() -> Vec<Execution> {
    let mut list = vec![Execution::Sequential];
    if cfg!(feature = "parallel") {
        list.push(Execution::Parallel);
    }
    list
}

fn replications(c: &mut Criterion) {
    let mut group = c.benchmark_group("replications");
    group.sample_size(10);
    for n in [4, 16] {
        let scenario = Scenario {
            n,
            aggregation: AggregationMode::Multi,
            rho: RhoSpec::uniform_default(),
            horizon: Horizon::Events(20_000),
            runs: 16,
            ..Scenario::default()
        };
        for exec in executors() {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &scenario, |b, s| {
                b.iter(|| run_replications(black_box(s), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut spec = builtin("fig5").unwrap();
    spec.runs = 4;
    spec.events = 10_000;
    let mut group = c.benchmark_group("fig5_sweep");
    group.sample_size(10);
    for exec in executors() {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| run_experiment(black_box(&spec), exec).unwrap())
        });
    }
    group.finish();
}

fn solvers(c: &mut Criterion) {
    let backoff = BackoffParams::default();
    c.bench_function("solve_hd/n=20", |b| {
        b.iter(|| solve_hd(black_box(20), &backoff, &SolverOptions::default()).unwrap())
    });
    c.bench_function("solve_ibfd/n=20", |b| {
        b.iter(|| solve_ibfd(black_box(20), &backoff, &SolverOptions::ibfd()).unwrap())
    });
}

criterion_group!(benches, replications, sweep, solvers);
criterion_main!(benches);
