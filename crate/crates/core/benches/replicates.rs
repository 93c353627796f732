use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hypgaf::exact_l1::build_model;
use hypgaf::mc_engine::{empirical_moments, tail_tilted_l1, EngineConfig};
use hypgaf::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn zero_count_replicates(c: &mut Criterion) {
    let mut group = c.benchmark_group("empirical_moments");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = EngineConfig {
            exec,
            ..EngineConfig::default()
        };
        group.bench_with_input(BenchmarkId::new(name, "L=1 r=0.9 n=1000"), &cfg, |b, cfg| {
            b.iter(|| black_box(empirical_moments(1.0, 0.9, 1000, 1, cfg).unwrap()))
        });
    }
    group.finish();
}

fn tilted_replicates(c: &mut Criterion) {
    let model = build_model(0.9, 1e-12).unwrap();
    let mut group = c.benchmark_group("tail_tilted_l1");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "r=0.9 V=25 n=20000"), &exec, |b, &exec| {
            b.iter(|| black_box(tail_tilted_l1(&model, 25, 20_000, 3, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, zero_count_replicates, tilted_replicates);
criterion_main!(benches);
