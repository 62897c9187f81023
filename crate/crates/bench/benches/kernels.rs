use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use spinmetro::entangle::{maximally_entangled, random_state};
use spinmetro::linalg::hermitian_eig;
use spinmetro::{nonorthogonal_protocol, orthogonal_protocol, run_estimation, BipartiteState};
use spinmetro_bench::{generator, maximal_setup, single_trial};

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eig");
    for twice_s in [2u32, 6, 12] {
        let g = generator(f64::from(twice_s) / 2.0, 0.9);
        group.bench_with_input(BenchmarkId::from_parameter(g.dim()), g.hamiltonian(), |b, h| {
            b.iter(|| hermitian_eig(black_box(h)).unwrap())
        });
    }
    group.finish();
}

fn protocols(c: &mut Criterion) {
    let g = generator(1.0, 1.1);
    let maximal = maximally_entangled(3).unwrap();
    c.bench_function("orthogonal_protocol/m=3", |b| {
        b.iter(|| orthogonal_protocol(black_box(&maximal), &g, 0.4).unwrap())
    });
    let diag = BipartiteState::diagonal(&[0.5, 0.5f64.sqrt(), 0.5]).unwrap();
    c.bench_function("nonorthogonal_protocol/spin1_diag", |b| {
        b.iter(|| nonorthogonal_protocol(black_box(&diag), &g, 0.4).unwrap())
    });
    let g5 = generator(2.5, 0.7);
    let random = random_state(6, &mut ChaCha8Rng::seed_from_u64(1));
    c.bench_function("nonorthogonal_protocol/m=6_random", |b| {
        b.iter(|| nonorthogonal_protocol(black_box(&random), &g5, 0.4).unwrap())
    });
}

fn estimation(c: &mut Criterion) {
    let setup = maximal_setup();
    let cfg = single_trial(10_000, 5);
    c.bench_function("run_estimation/2_trials_x_1e4_shots", |b| {
        b.iter(|| run_estimation(black_box(&cfg), &setup).unwrap())
    });
}

criterion_group!(benches, eigen, protocols, estimation);
criterion_main!(benches);
