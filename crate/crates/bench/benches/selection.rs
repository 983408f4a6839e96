use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use prominence_bench::{fixture, residual_pool, TOKEN_COUNTS};
use prominence_core::selection::{dpp_greedy_map, fps_select, DiversityContext};
use prominence_core::{compress, spectral_entropy, CompressConfig, DiversityMethod, Preset};

fn entropy(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_entropy");
    for n in TOKEN_COUNTS {
        let (tokens, _) = fixture(n, 1024, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &tokens, |b, t| {
            b.iter(|| spectral_entropy(t).unwrap())
        });
    }
    group.finish();
}

fn diversity(c: &mut Criterion) {
    let mut group = c.benchmark_group("diversity");
    let (tokens, sal) = fixture(2880, 1024, 2);
    let pool = residual_pool(&sal, 32);
    let ctx = DiversityContext::default().with_saliency(&sal);
    for k in [32, 160, 288] {
        group.bench_with_input(BenchmarkId::new("dpp", k), &k, |b, &k| {
            b.iter(|| dpp_greedy_map(&tokens, &pool, k, &ctx).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fps", k), &k, |b, &k| {
            b.iter(|| fps_select(&tokens, &pool, k, &ctx).unwrap())
        });
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("compress");
    for (n, budget) in [(576, 64), (2880, 320)] {
        let (tokens, sal) = fixture(n, 1024, 3);
        for method in [DiversityMethod::Dpp, DiversityMethod::Fps] {
            let cfg = CompressConfig::new(budget, Preset::Clip).with_diversity(method);
            group.bench_function(BenchmarkId::new(format!("{method:?}"), n), |b| {
                b.iter(|| compress(&tokens, &sal, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(10).warm_up_time(Duration::from_secs(1));
    targets = entropy, diversity, pipeline
);
criterion_main!(benches);
