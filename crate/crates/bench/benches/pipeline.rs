//! Hot-path benchmarks: catalog enumeration, candidate-set
//! construction for one environment, the distance-table build, and a
//! full greedy selection on a reduced problem.

use criterion::{criterion_group, criterion_main, Criterion};
use driveteach_core::teaching::EnvironmentPool;
use driveteach_core::{
    candidate_set, enumerate_environments, greedy_select, instantiate, sample_candidate_thetas,
    DistanceTables, LearnerKind, RunConfig, TeachingProblem,
};
use std::hint::black_box;
use std::sync::Arc;

/// Reduced setup so table builds and selection stay in the
/// millisecond range; per-entry costs match the full problem.
fn small_config() -> RunConfig {
    let mut config = RunConfig::default();
    config.pool_per_class = 6;
    config.theta_count = 10;
    config
}

fn bench_enumerate(c: &mut Criterion) {
    c.bench_function("enumerate_environments", |b| b.iter(|| black_box(enumerate_environments())));
}

fn bench_candidate_set(c: &mut Criterion) {
    let config = RunConfig::default();
    let specs = enumerate_environments();
    let env = instantiate(&specs[5760], &config);
    c.bench_function("candidate_set", |b| {
        b.iter(|| black_box(candidate_set(&env, &config).unwrap()))
    });
}

fn bench_distance_tables(c: &mut Criterion) {
    let config = small_config();
    let thetas = Arc::new(sample_candidate_thetas(&config));
    let pool = EnvironmentPool::build(&config).unwrap();
    c.bench_function("distance_tables_24env_11theta", |b| {
        b.iter(|| black_box(DistanceTables::build(&pool, &thetas, &config).unwrap()))
    });
}

fn bench_greedy_select(c: &mut Criterion) {
    let config = small_config();
    let problem = TeachingProblem::new(&config).unwrap();
    let spec = LearnerKind::DetEuclid.spec(&config);
    c.bench_function("greedy_select_det_euclid", |b| {
        b.iter(|| black_box(greedy_select(&problem, &spec, "det-euclid").unwrap()))
    });
}

criterion_group!(
    benches,
    bench_enumerate,
    bench_candidate_set,
    bench_distance_tables,
    bench_greedy_select
);
criterion_main!(benches);
