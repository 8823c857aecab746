use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use scanlens::analysis::analyze_frames;
use scanlens::causes::Thresholds;
use scanlens::par::Execution;
use scanlens::simulator::{generate_with, reference, sweep};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn analysis(c: &mut Criterion) {
    let trace = generate_with(&reference::nine_hour_comparison(1), Execution::Parallel).unwrap().trace;
    let th = Thresholds::default();
    let mut group = c.benchmark_group("analyze_frames");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| analyze_frames(&trace, &th, exec))
        });
    }
    group.finish();
}

fn generation(c: &mut Criterion) {
    let spec = reference::nine_hour_comparison(1);
    let mut group = c.benchmark_group("generate");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| generate_with(&spec, exec).unwrap())
        });
    }
    group.finish();
}

fn seed_sweep(c: &mut Criterion) {
    let spec = reference::nine_hour_comparison(1);
    let seeds: Vec<u64> = (1..=8).collect();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sweep(&spec, &seeds, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, analysis, generation, seed_sweep);
criterion_main!(benches);
