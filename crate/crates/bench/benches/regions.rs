use std::hint::black_box;

use cascade_synth::prob::JointDistribution;
use cascade_synth::regions::{scatter_relay_region, task_region, triple_wyner};
use cascade_synth::{OptimizerConfig, Variable};
use criterion::{criterion_group, criterion_main, Criterion};

fn hulls(c: &mut Criterion) {
    c.bench_function("task_region m=30", |b| b.iter(|| task_region(black_box(30)).unwrap()));
    c.bench_function("task_region m=100", |b| b.iter(|| task_region(black_box(100)).unwrap()));
    c.bench_function("scatter_relay_region m=64", |b| {
        b.iter(|| scatter_relay_region(black_box(64)).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let vars = ["X", "Y", "Z"].iter().map(|n| Variable::new(*n, 2)).collect();
    let q = JointDistribution::from_fn(vars, |t| {
        let agree = (t[0] == t[1]) as usize + (t[1] == t[2]) as usize;
        [0.02, 0.08, 0.3][agree]
    })
    .unwrap();
    let cfg = OptimizerConfig {
        restarts: 4,
        max_iterations: 2000,
        ..Default::default()
    };
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("triple_wyner |W|=8", |b| b.iter(|| triple_wyner(&q, Some(8), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, hulls, search);
criterion_main!(benches);
