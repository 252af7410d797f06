//! Random instances for the property tests.

use crate::factor::{encode_state_with, EncodeOptions};
use crate::{build_incidence_factor, to_greek_moments, CartesianMoments, Limits, MomentVector, QuadraticHamiltonian};
use crate::SparseSymmetricMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random Laplacian-type stiffness: nonnegative springs, at most `d`
/// nonzeros per row (diagonal included), slack zero with probability
/// `zero_slack`.
pub fn random_laplacian<R: Rng>(rng: &mut R, m: usize, d: usize, zero_slack: f64) -> Vec<(usize, usize, f64)> {
    let mut deg = vec![0usize; m];
    let mut off = Vec::new();
    let attempts = rng.gen_range(0..=m * d / 2 + 1);
    for _ in 0..attempts {
        let j = rng.gen_range(0..m);
        let k = rng.gen_range(0..m);
        if j == k || deg[j] + 1 >= d || deg[k] + 1 >= d || off.iter().any(|&(a, b, _)| (a, b) == (j.min(k), j.max(k))) {
            continue;
        }
        deg[j] += 1;
        deg[k] += 1;
        off.push((j.min(k), j.max(k), rng.gen_range(0.1..2.0)));
    }
    let mut diag = vec![0.0; m];
    for &(j, k, w) in &off {
        diag[j] += w;
        diag[k] += w;
    }
    let mut out: Vec<_> = off.into_iter().map(|(j, k, w)| (j, k, -w)).collect();
    for (j, s) in diag.into_iter().enumerate() {
        let slack = if rng.gen_bool(zero_slack) { 0.0 } else { rng.gen_range(0.1..2.0) };
        out.push((j, j, s + slack));
    }
    out
}

pub fn dense_from(m: usize, triplets: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m, m);
    for &(j, k, v) in triplets {
        a[(j, k)] = v;
        a[(k, j)] = v;
    }
    a
}

pub fn sparse_from(m: usize, triplets: &[(usize, usize, f64)]) -> SparseSymmetricMatrix {
    SparseSymmetricMatrix::from_triplets(m, triplets.iter().copied()).unwrap()
}

/// Row-major multi-index of `idx` in base `k`.
pub fn digits(mut idx: usize, k: usize, rank: usize) -> Vec<usize> {
    let mut out = vec![0; rank];
    for slot in (0..rank).rev() {
        out[slot] = idx % k;
        idx /= k;
    }
    out
}

/// Inertial instance with random Laplacian `A`, `C` and every cartesian
/// moment up to `order` filled in.
pub fn instance(seed: u64, max_modes: usize, order: usize) -> (QuadraticHamiltonian, MomentVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=max_modes);
    let a = sparse_from(m, &random_laplacian(&mut rng, m, m, 0.3));
    let c = sparse_from(m, &random_laplacian(&mut rng, m, m, 0.3));
    let h = QuadraticHamiltonian::inertial(a, c).unwrap();
    let mut cart = CartesianMoments::new(m);
    for r in 1..=order {
        for idx in 0..(2 * m).pow(r as u32) {
            let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            cart.insert(digits(idx, 2 * m, r), v).unwrap();
        }
    }
    let greek = to_greek_moments(
        &build_incidence_factor(h.a()).unwrap(),
        &build_incidence_factor(h.c()).unwrap(),
        &cart,
    )
    .unwrap();
    let options = EncodeOptions {
        vacuum: true,
        order_max: Some(order),
    };
    let psi = encode_state_with(&greek, options, &Limits::default()).unwrap();
    (h, psi)
}

pub fn max_diff(x: &MomentVector, y: &MomentVector) -> f64 {
    x.amplitudes
        .keys()
        .chain(y.amplitudes.keys())
        .map(|k| (x.amplitude(k) - y.amplitude(k)).norm())
        .fold(0.0, f64::max)
}
