//! The same workloads on the default rayon pool and on a one-thread pool.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use quasar_zo::checkers::{check_quasar_convexity, SamplingBox};
use quasar_zo::harness::{execute, ExperimentConfig};
use quasar_zo::problems::hard_quasar_problem;
use quasar_zo::smoothing::estimate_f_mu;
use quasar_zo::{RandomStream, Vector};
use rayon::ThreadPool;

fn pools() -> Vec<(String, ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![
        (format!("pool_{}", default.current_num_threads()), default),
        ("sequential".to_string(), single),
    ]
}

fn smoothing_estimate(c: &mut Criterion) {
    let p = hard_quasar_problem(20, 1e-6).unwrap();
    let x = Vector::filled(20, 0.5);
    let mut group = c.benchmark_group("f_mu_estimate_20k");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| {
                pool.install(|| {
                    let mut s = RandomStream::new(1);
                    black_box(estimate_f_mu(&p, &x, 1e-3, 20_000, &mut s).unwrap())
                })
            })
        });
    }
    group.finish();
}

fn quasar_check(c: &mut Criterion) {
    let p = hard_quasar_problem(20, 1e-6).unwrap();
    let region = SamplingBox::of_problem(&p).unwrap();
    let xstar = Vector::filled(20, 1.0);
    let mut group = c.benchmark_group("quasar_check_10k");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| {
                pool.install(|| {
                    let mut s = RandomStream::new(2);
                    black_box(check_quasar_convexity(&p, 0.5, 0.0, &xstar, &region, 10_000, &mut s).unwrap())
                })
            })
        });
    }
    group.finish();
}

fn multi_seed_runs(c: &mut Criterion) {
    let config = ExperimentConfig::parse(
        "name = bench\nproblem = radial\nproblem.dim = 100\nset = l1\nset.radius = 20\n\
         method = rm\niterations = 500\nstep = fixed\nstep.h = 1e-3\nmu = 1e-10\nbatch = 10\n\
         seeds = 0,1,2,3,4,5,6,7",
    )
    .unwrap();
    let mut group = c.benchmark_group("radial_8_seeds");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| black_box(execute(&config).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, smoothing_estimate, quasar_check, multi_seed_runs);
criterion_main!(benches);
