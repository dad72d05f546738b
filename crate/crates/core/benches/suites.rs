use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qrice::verifier::{run_suite, run_suite_sequential, ModeSelect, SampleConfig, Suite};

fn sequential_vs_parallel(c: &mut Criterion) {
    let mut group = c.benchmark_group("suites");
    group.sample_size(10);
    let cases = [
        (Suite::Identity1, SampleConfig { n_max: 6, m_max: 3, trials: 3, order: 16, ..SampleConfig::default() }),
        (Suite::Identity2, SampleConfig { trials: 5, order: 20, ..SampleConfig::default() }),
        (Suite::ProductLemma, SampleConfig { m_max: 3, trials: 2, order: 20, ..SampleConfig::default() }),
        (
            Suite::All,
            SampleConfig {
                n_max: 4,
                m_max: 2,
                trials: 2,
                order: 12,
                mode: ModeSelect::Both,
                ..SampleConfig::default()
            },
        ),
    ];
    for (suite, cfg) in cases {
        group.bench_with_input(BenchmarkId::new("sequential", suite.name()), &cfg, |b, cfg| {
            b.iter(|| black_box(run_suite_sequential(suite, cfg).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("parallel", suite.name()), &cfg, |b, cfg| {
            b.iter(|| black_box(run_suite(suite, cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, sequential_vs_parallel);
criterion_main!(benches);
