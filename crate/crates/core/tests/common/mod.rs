//! Instance generators and dense reference computations shared by the
//! integration tests. Nothing here calls into the algorithms under test.

#![allow(dead_code)]

use boson_moments::{GreekIndex, GreekSpace, SparseSymmetricMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

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

/// Incidence column of the pair `(j, k)` built straight from the matrix.
pub fn incidence_column(a: &DMatrix<f64>, j: usize, k: usize) -> Vec<f64> {
    let m = a.nrows();
    let mut col = vec![0.0; m];
    if j == k {
        let slack: f64 = (0..m).map(|c| a[(j, c)]).sum();
        col[j] = slack.max(0.0).sqrt();
    } else {
        let w = (-a[(j, k)]).max(0.0).sqrt();
        col[j] = w;
        col[k] = -w;
    }
    col
}

/// Row `l` maps cartesian `(q, p)` to the greek coordinate with linear
/// index `l`: `z = i bᵀq` or `z̄ = dᵀp`.
pub fn greek_map(a: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<Complex64> {
    let m = a.nrows();
    let space = GreekSpace::new(m);
    let mut g = DMatrix::zeros(space.dim(), 2 * m);
    for l in 0..space.dim() {
        let GreekIndex { j, k, bar } = space.label(l as u32);
        if bar {
            for (r, v) in incidence_column(c, j, k).into_iter().enumerate() {
                g[(l, m + r)] = Complex64::new(v, 0.0);
            }
        } else {
            for (r, v) in incidence_column(a, j, k).into_iter().enumerate() {
                g[(l, r)] = Complex64::new(0.0, v);
            }
        }
    }
    g
}

/// `[[0, C], [−A, 0]]`.
pub fn inertial_generator(a: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let mut g = DMatrix::zeros(2 * m, 2 * m);
    g.view_mut((0, m), (m, m)).copy_from(c);
    g.view_mut((m, 0), (m, m)).copy_from(&(-a));
    g
}

/// Applies `u` to every slot of a row-major rank-`r` tensor.
pub fn apply_slotwise(u: &DMatrix<Complex64>, x: &[Complex64], rank: usize) -> Vec<Complex64> {
    let (rows, cols) = u.shape();
    let mut cur = x.to_vec();
    let mut shape = vec![cols; rank];
    for slot in 0..rank {
        let outer: usize = shape[..slot].iter().product();
        let inner: usize = shape[slot + 1..].iter().product();
        let mut next = vec![Complex64::default(); outer * rows * inner];
        for o in 0..outer {
            for r in 0..rows {
                for c in 0..cols {
                    let w = u[(r, c)];
                    if w == Complex64::default() {
                        continue;
                    }
                    let src = (o * cols + c) * inner;
                    let dst = (o * rows + r) * inner;
                    for i in 0..inner {
                        next[dst + i] += w * cur[src + i];
                    }
                }
            }
        }
        shape[slot] = rows;
        cur = next;
    }
    cur
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
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

/// Minimal statevector simulator with qubit 0 as the most significant bit.
pub enum RefGate {
    H(usize),
    Ccx(usize, usize, usize),
}

pub fn simulate(n: usize, gates: &[RefGate]) -> Vec<f64> {
    let dim = 1 << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut psi = vec![0.0; dim];
    psi[0] = 1.0;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for g in gates {
        match *g {
            RefGate::H(t) => {
                for i in 0..dim {
                    if i & bit(t) == 0 {
                        let (a, b) = (psi[i], psi[i | bit(t)]);
                        psi[i] = s * (a + b);
                        psi[i | bit(t)] = s * (a - b);
                    }
                }
            }
            RefGate::Ccx(c1, c2, t) => {
                for i in 0..dim {
                    if i & bit(c1) != 0 && i & bit(c2) != 0 && i & bit(t) == 0 {
                        psi.swap(i, i | bit(t));
                    }
                }
            }
        }
    }
    psi
}

/// `(δ, ‖⟨1_Q|Ψ₁⟩‖²)` with P = qubit 0 and Q = qubit 1.
pub fn postselect(n: usize, psi: &[f64]) -> (f64, f64) {
    let p = 1usize << (n - 1);
    let q = 1usize << (n - 2);
    let delta_sq: f64 = psi.iter().enumerate().filter(|(i, _)| i & p != 0).map(|(_, v)| v * v).sum();
    let hit: f64 = psi
        .iter()
        .enumerate()
        .filter(|(i, _)| i & p != 0 && i & q != 0)
        .map(|(_, v)| v * v)
        .sum();
    let delta = delta_sq.sqrt();
    (delta, if delta_sq > 0.0 { hit / delta_sq } else { f64::NAN })
}
