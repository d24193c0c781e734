//! Table-builder and transform benchmarks: the fast convolution path
//! against the naive reference, batch L-values, and the classifier.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use toroidal::ffield::FieldContext;
use toroidal::lmoments::LValueTable;
use toroidal::sheafclass::{classify, CharacterMultiset};
use toroidal::tracefn::{
    hyp_table, k_ab_table, kloosterman_table, kloosterman_table_naive, mult_convolve,
    mult_convolve_naive,
};

fn bench_kloosterman(c: &mut Criterion) {
    let mut group = c.benchmark_group("kloosterman");
    for q in [1009u64, 10_007, 100_003] {
        let ctx = FieldContext::new(q).unwrap();
        group.bench_with_input(BenchmarkId::new("fast_k3", q), &q, |bench, _| {
            bench.iter(|| kloosterman_table(&ctx, 3))
        });
        if q <= 1009 {
            group.bench_with_input(BenchmarkId::new("naive_k3", q), &q, |bench, _| {
                bench.iter(|| kloosterman_table_naive(&ctx, 3))
            });
        }
    }
    group.finish();
}

fn bench_hyp_and_mixed(c: &mut Criterion) {
    let mut group = c.benchmark_group("hyp");
    group.sample_size(20);
    for q in [10_009u64, 100_003] {
        // 100003 - 1 is divisible by 6, so ρ[2], ρ[3] have full size.
        let ctx = FieldContext::new(q).unwrap();
        let chi = CharacterMultiset::rho(&ctx, 2)
            .unwrap()
            .union(&CharacterMultiset::trivial_power(&ctx, 2));
        let theta = CharacterMultiset::rho(&ctx, 3).unwrap();
        group.bench_with_input(BenchmarkId::new("hyp_4_3", q), &q, |bench, _| {
            bench.iter(|| hyp_table(&ctx, &chi, &theta).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("k_ab_2_m3_2", q), &q, |bench, _| {
            bench.iter(|| k_ab_table(&ctx, 2, -3, 2).unwrap())
        });
    }
    group.finish();
}

fn bench_convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("mult_convolve");
    let ctx = FieldContext::new(1009).unwrap();
    let f = kloosterman_table(&ctx, 2);
    let g = kloosterman_table(&ctx, 3);
    group.bench_function("fast_q1009", |b| b.iter(|| mult_convolve(&f, &g).unwrap()));
    group.bench_function("naive_q1009", |b| {
        b.iter(|| mult_convolve_naive(&f, &g).unwrap())
    });
    group.finish();
}

fn bench_lvalues(c: &mut Criterion) {
    let mut group = c.benchmark_group("l_values");
    group.sample_size(10);
    for q in [1009u64, 10_007] {
        let ctx = FieldContext::new(q).unwrap();
        group.bench_with_input(BenchmarkId::new("batch", q), &q, |bench, _| {
            bench.iter(|| LValueTable::build(&ctx).unwrap())
        });
    }
    group.finish();
}

fn bench_classify(c: &mut Criterion) {
    let ctx = FieldContext::new(61).unwrap();
    c.bench_function("classify_2_m5_3", |b| {
        b.iter(|| classify(&ctx, 2, -5, 3).unwrap())
    });
}

criterion_group!(
    benches,
    bench_kloosterman,
    bench_hyp_and_mixed,
    bench_convolution,
    bench_lvalues,
    bench_classify
);
criterion_main!(benches);
