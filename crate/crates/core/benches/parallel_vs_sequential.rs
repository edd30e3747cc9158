use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lapsim::experiments::{figure_b_dims, slow_decay_sweep, FigureBParams, SlowDecayParams};
use lapsim::rays::{nontrapping_scan, Sampling, ScanConfig, TraceConfig};
use lapsim::{Execution, MediumProfile, SourceProfile};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ray_scan(c: &mut Criterion) {
    let medium = MediumProfile::benchmark();
    let cfg = ScanConfig {
        n_positions: 8,
        n_directions: 8,
        trace: TraceConfig::new(1e-3, 10.0, 10.0),
        sampling: Sampling::Seeded(1),
    };
    let mut g = c.benchmark_group("ray_scan_64");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| black_box(nontrapping_scan(&medium, &cfg, e).unwrap()))
        });
    }
    g.finish();
}

fn forced_runs(c: &mut Criterion) {
    let params = FigureBParams {
        r_max: 30.0,
        t_final: 20.0,
        ..FigureBParams::default()
    };
    let (m, s) = (MediumProfile::benchmark(), SourceProfile::benchmark());
    let mut g = c.benchmark_group("forced_runs_d123");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| black_box(figure_b_dims(&[1, 2, 3], &params, &m, &s, e)))
        });
    }
    g.finish();
}

fn oracle_sweep(c: &mut Criterion) {
    let p = SlowDecayParams {
        samples: 24,
        ..SlowDecayParams::default()
    };
    let mut g = c.benchmark_group("poisson_sweep_24");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| black_box(slow_decay_sweep(2, 1.0, &p, e).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, ray_scan, forced_runs, oracle_sweep);
criterion_main!(benches);
