use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use voltkit::integrals::trace_power;
use voltkit::laxkit::search_signs;
use voltkit::poisson::{derive_a_poisson, jacobi_violation, two_diagonal_poisson};
use voltkit::report;
use voltkit::rootsys::PhiSystem;
use voltkit_bench::{pair, two_diagonal};

fn sign_search(c: &mut Criterion) {
    let phi = PhiSystem::parse(4, "1,2,3,4,1+2,2+3,3+4").unwrap();
    c.bench_function("sign search rank 4", |b| b.iter(|| search_signs(black_box(&phi)).unwrap()));
    c.bench_function("enumerate rank 4", |b| b.iter(|| report::enumerate(black_box(4), 6).unwrap()));
}

fn symbolic(c: &mut Criterion) {
    let l = two_diagonal(4, 10).l;
    c.bench_function("det 10x10 two-diagonal", |b| b.iter(|| black_box(&l).det()));
    c.bench_function("trace L^9 10x10 two-diagonal", |b| b.iter(|| trace_power(black_box(&l), 9).unwrap()));
}

fn poisson(c: &mut Criterion) {
    let ex = pair(3, "1,2,3,1+2,2+3");
    c.bench_function("derive Poisson matrix rank 3", |b| b.iter(|| derive_a_poisson(black_box(&ex), 1).unwrap()));
    let pi = two_diagonal_poisson(4, 10, 1).unwrap().pi;
    let mut group = c.benchmark_group("jacobi");
    group.sample_size(10);
    group.bench_function("13 variables", |b| b.iter(|| jacobi_violation(black_box(&pi))));
    group.finish();
}

criterion_group!(benches, sign_search, symbolic, poisson);
criterion_main!(benches);
