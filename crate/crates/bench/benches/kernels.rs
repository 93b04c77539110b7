use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gbl_bench::{desk_params, random_ids, random_sequence, random_vector};
use gbl_core::construction::subset_norm;
use gbl_core::maximal::{hl_maximal, hl_maximal_reference};
use gbl_core::space::norm_unchecked;
use gbl_core::Exponent;

fn mixed_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("mixed_norm");
    for blocks in [100u64, 10_000] {
        let v = random_vector(4, blocks, 1);
        group.bench_with_input(BenchmarkId::new("p1.5_q3", blocks), &v, |b, v| {
            b.iter(|| norm_unchecked(black_box(v), Exponent::Finite(1.5), Exponent::Finite(3.0)))
        });
    }
    group.finish();
}

fn compressed_subset_norm(c: &mut Criterion) {
    let params = desk_params();
    let mut group = c.benchmark_group("subset_norm");
    for size in [16usize, 1024] {
        let ids = random_ids(&params, size, 2);
        group.bench_with_input(BenchmarkId::new("p_inf", size), &ids, |b, ids| {
            b.iter(|| subset_norm(&params, black_box(ids), Exponent::Infinite).unwrap())
        });
    }
    group.finish();
}

fn maximal_operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("hl_maximal");
    for len in [256usize, 4096] {
        let a = random_sequence(len, 3);
        group.bench_with_input(BenchmarkId::new("hull", len), &a, |b, a| b.iter(|| hl_maximal(black_box(a))));
        if len <= 256 {
            group.bench_with_input(BenchmarkId::new("reference", len), &a, |b, a| {
                b.iter(|| hl_maximal_reference(black_box(a)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, mixed_norm, compressed_subset_norm, maximal_operator);
criterion_main!(benches);
