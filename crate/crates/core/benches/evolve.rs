use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vrabi::analysis::{sweep, sweep_sequential};
use vrabi::dynamics::{evolve_full, evolve_full_sequential};
use vrabi::{initial_state, IntegratorConfig, ModelParams};

fn small() -> (ModelParams, IntegratorConfig) {
    let params = ModelParams { n_bar: 4.0, n_max: 48, g_ab: 0.04, g_ac: 0.02, ..ModelParams::default() };
    let cfg = IntegratorConfig { t_end: 200.0, ..IntegratorConfig::default() };
    (params, cfg)
}

fn bench_evolve(c: &mut Criterion) {
    let (params, cfg) = small();
    let state = initial_state(&params).unwrap();
    let mut group = c.benchmark_group("evolve");
    group.sample_size(20);
    group.bench_function("parallel", |b| b.iter(|| evolve_full(&state, &params, &cfg).unwrap()));
    group.bench_function("sequential", |b| b.iter(|| evolve_full_sequential(&state, &params, &cfg).unwrap()));
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let (params, cfg) = small();
    let ratios = [0.5, 1.0];
    let placements = [1.3, 1.7, 2.0];
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for workers in [1, 0] {
        group.bench_with_input(BenchmarkId::new("parallel", workers), &workers, |b, &w| {
            b.iter(|| sweep(&params, &cfg, &ratios, &placements, w).unwrap())
        });
    }
    group.bench_function("sequential", |b| b.iter(|| sweep_sequential(&params, &cfg, &ratios, &placements).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_evolve, bench_sweep);
criterion_main!(benches);
