use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use g2het::exec::{self, Mode};
use g2het_cli::registry::{cases, run_cases};

fn reproduce_all(c: &mut Criterion) {
    let mut g = c.benchmark_group("reproduce_all");
    g.sample_size(10);
    for (name, mode) in [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &m| {
            exec::set_mode(m);
            b.iter(|| run_cases(cases(), false).len());
        });
    }
    g.finish();
}

criterion_group!(benches, reproduce_all);
criterion_main!(benches);
