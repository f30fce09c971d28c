use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use nestopt::instances::{generate, GenSpec};
use nestopt::{build_envelope, generate_candidates, solve, solve_with, SolveOptions};

fn instance(m: usize, n: usize) -> nestopt::Instance {
    generate(&GenSpec {
        m,
        n,
        seed: 1,
        ..GenSpec::default()
    })
    .unwrap()
}

fn candidates(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate_candidates");
    for n in [10, 20, 50, 100, 200] {
        let inst = instance(1, n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst.nests[0], |b, nest| {
            b.iter(|| generate_candidates(black_box(nest)))
        });
    }
    group.finish();
}

fn envelope(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_envelope");
    for n in [20, 100, 200] {
        let set = generate_candidates(&instance(1, n).nests[0]);
        group.bench_with_input(BenchmarkId::from_parameter(n), &set, |b, set| {
            b.iter(|| build_envelope(black_box(set)).unwrap())
        });
    }
    group.finish();
}

fn full_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for (m, n) in [(100, 10), (1000, 20), (10000, 20), (1000, 100)] {
        let inst = instance(m, n);
        group.bench_with_input(BenchmarkId::new(format!("n{n}"), m), &inst, |b, inst| {
            b.iter(|| solve(black_box(inst)).unwrap())
        });
    }
    let inst = instance(10000, 20);
    group.bench_function("n20_parallel/10000", |b| {
        b.iter(|| solve_with(black_box(&inst), &SolveOptions { parallel_nests: true }).unwrap())
    });
    group.finish();
}

criterion_group!(benches, candidates, envelope, full_solve);
criterion_main!(benches);
