use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ising_echo::echo::{default_step, spectrum_series};
use ising_echo::spectrum::{mode_spectrum, ChainConfig};
use ising_echo::sweep::{run_sweep, ScanValues, SweepSpec, Truncation};
use ising_echo::{Execution, TimeGrid};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn echo_series(c: &mut Criterion) {
    let mut group = c.benchmark_group("echo_series");
    group.sample_size(10);
    for n in [400, 4000] {
        let cfg = ChainConfig::with_lambda_star(1.0, 0.5, 0.01, n).unwrap();
        let spec = mode_spectrum(&cfg).unwrap();
        let grid = TimeGrid::new(0.0, default_step(&spec), 5000).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &grid, |b, grid| {
                b.iter(|| spectrum_series(black_box(&spec), grid, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let spec = SweepSpec {
        coupling: 1.0,
        delta: 0.01,
        lambda_star: ScanValues::Range {
            min: 0.5,
            max: 1.5,
            step: 0.1,
        },
        n_spins: vec![100, 200],
        dt: None,
        t_max: Truncation::Auto,
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| run_sweep(black_box(&spec), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, echo_series, sweep);
criterion_main!(benches);
