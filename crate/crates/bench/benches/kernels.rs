use std::hint::black_box;

use boson_moments::factor::{encode_state_with, EncodeOptions};
use boson_moments::gadget::solve_clock_spectrum;
use boson_moments::{
    build_incidence_factor, effective_hamiltonian, evolve_moment_vector, EffectiveHamiltonian, GreekIndex,
    GreekMoments, GreekSpace, Limits, MomentVector, SparseSymmetricMatrix,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

/// Ring of `m` unit springs, each mode also tied to the wall.
fn ring(m: usize) -> SparseSymmetricMatrix {
    let triplets = (0..m)
        .map(|j| (j, j, 3.0))
        .chain((0..m).map(|j| (j.min((j + 1) % m), j.max((j + 1) % m), -1.0)));
    SparseSymmetricMatrix::from_triplets(m, triplets).unwrap()
}

fn setup(m: usize, order: usize) -> (EffectiveHamiltonian, MomentVector) {
    let a = ring(m);
    let c = SparseSymmetricMatrix::from_triplets(m, (0..m).map(|j| (j, j, 1.0))).unwrap();
    let h0 = effective_hamiltonian(&build_incidence_factor(&a).unwrap(), &build_incidence_factor(&c).unwrap()).unwrap();
    let mut moments = GreekMoments::new(GreekSpace::new(m));
    let slot = GreekIndex::new(0, 0, false);
    moments.insert(&vec![slot; order], Complex64::new(1.0, 0.0)).unwrap();
    let options = EncodeOptions {
        vacuum: true,
        order_max: Some(order),
    };
    let psi = encode_state_with(&moments, options, &Limits::default()).unwrap();
    (h0, psi)
}

fn factorization(c: &mut Criterion) {
    let mut group = c.benchmark_group("incidence_factor");
    for m in [16, 256, 4096] {
        let a = ring(m);
        group.bench_with_input(BenchmarkId::from_parameter(m), &a, |b, a| {
            b.iter(|| build_incidence_factor(black_box(a)).unwrap())
        });
    }
    group.finish();
}

fn sector_evolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("sector_evolution");
    group.sample_size(10);
    let (h0, psi) = setup(4, 3);
    let eigen = Limits::default();
    let krylov = Limits {
        dense_sector: 0,
        ..Limits::default()
    };
    group.bench_function("eigen_m4_r3", |b| {
        b.iter(|| evolve_moment_vector(&h0, black_box(&psi), 1.0, 1e-8, &eigen).unwrap())
    });
    group.bench_function("krylov_m4_r3", |b| {
        b.iter(|| evolve_moment_vector(&h0, black_box(&psi), 1.0, 1e-8, &krylov).unwrap())
    });
    let (h0, psi) = setup(8, 2);
    group.bench_function("krylov_m8_r2", |b| {
        b.iter(|| evolve_moment_vector(&h0, black_box(&psi), 1.0, 1e-8, &krylov).unwrap())
    });
    group.finish();
}

fn clock(c: &mut Criterion) {
    let mut group = c.benchmark_group("clock_spectrum");
    for gates in [0, 10, 100] {
        group.bench_with_input(BenchmarkId::from_parameter(gates), &gates, |b, &l| {
            b.iter(|| solve_clock_spectrum(black_box(3.0), l).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, factorization, sector_evolution, clock);
criterion_main!(benches);
