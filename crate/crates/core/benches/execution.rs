//! Sequential versus rayon execution of the two replicate-parallel workloads.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dynborrow::bboot::{run, BootstrapConfig};
use dynborrow::data::Source;
use dynborrow::exec::{replicate_rng, Execution};
use dynborrow::rules::BorrowingRule;
use dynborrow::sim::{gen_normal, run_scenario, ScenarioConfig};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bootstrap(c: &mut Criterion) {
    let mut rng = replicate_rng(1, 0);
    let d0 = gen_normal(200, 0.0, 5, 0.5, Source::Internal, &mut rng).unwrap();
    let d1 = gen_normal(600, 0.2, 5, 0.5, Source::External, &mut rng).unwrap();
    let mut group = c.benchmark_group("bootstrap_2000");
    for (name, mode) in MODES {
        let cfg = BootstrapConfig::new(2000, 7, BorrowingRule::minmse(1.0, 1.0).unwrap())
            .with_execution(mode);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run(&d0, &d1, None, cfg).unwrap())
        });
    }
    group.finish();
}

fn bootstrap_ipw(c: &mut Criterion) {
    let mut rng = replicate_rng(2, 0);
    let d0 = gen_normal(200, 0.0, 3, 0.5, Source::Internal, &mut rng).unwrap();
    let d1 = gen_normal(400, 0.2, 3, 0.5, Source::External, &mut rng).unwrap();
    let mut group = c.benchmark_group("bootstrap_ipw_500");
    for (name, mode) in MODES {
        let cfg = BootstrapConfig::new(500, 7, BorrowingRule::minmse(1.0, 1.0).unwrap())
            .with_ipw(true)
            .with_execution(mode);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run(&d0, &d1, None, cfg).unwrap())
        });
    }
    group.finish();
}

fn scenario(c: &mut Criterion) {
    let cfg = ScenarioConfig::normal(100, 0.2, 1.0, 200, 100, 11);
    let mut group = c.benchmark_group("scenario_200x100");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, mode| {
            b.iter(|| run_scenario(&cfg, *mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bootstrap, bootstrap_ipw, scenario);
criterion_main!(benches);
