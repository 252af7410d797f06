//! Continuous-time quantum walks as inertially coupled oscillators.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::Limits;
use crate::dynamics::evolve_first_moments;
use crate::error::{Error, Result};
use crate::hamiltonian::QuadraticHamiltonian;
use crate::linalg::{smallest_symmetric_eigenvalue, symmetric_eigen, unitary_from_symmetric};
use crate::sparse::SparseSymmetricMatrix;

/// Undirected graph with nonnegative edge weights and no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkGraph {
    adjacency: SparseSymmetricMatrix,
    max_degree: usize,
    max_row_sum: f64,
}

impl WalkGraph {
    /// Edges are 0-based `(j, k, weight)`; each undirected edge once.
    pub fn from_edges<I>(vertices: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let edges: Vec<_> = edges.into_iter().collect();
        for &(j, k, w) in &edges {
            if j == k {
                return Err(Error::Structural(format!("self-loop at vertex {}", j + 1)));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Structural(format!(
                    "edge ({},{}) has weight {w}; weights must be nonnegative",
                    j + 1,
                    k + 1
                )));
            }
        }
        let adjacency = SparseSymmetricMatrix::from_triplets(vertices, edges)?;
        Ok(Self::from_adjacency_unchecked(adjacency))
    }

    pub fn from_adjacency(adjacency: SparseSymmetricMatrix) -> Result<Self> {
        for (j, k, w) in adjacency.upper_entries() {
            if j == k && w != 0.0 {
                return Err(Error::Structural(format!("self-loop at vertex {}", j + 1)));
            }
            if w < 0.0 {
                return Err(Error::Structural("negative edge weight".into()));
            }
        }
        Ok(Self::from_adjacency_unchecked(adjacency))
    }

    fn from_adjacency_unchecked(adjacency: SparseSymmetricMatrix) -> Self {
        let m = adjacency.dim();
        let max_degree = (0..m)
            .map(|j| adjacency.row(j).iter().filter(|&&(k, w)| k != j && w != 0.0).count())
            .max()
            .unwrap_or(0);
        let max_row_sum = (0..m).map(|j| adjacency.slack(j)).fold(0.0, f64::max);
        WalkGraph {
            adjacency,
            max_degree,
            max_row_sum,
        }
    }

    pub fn vertices(&self) -> usize {
        self.adjacency.dim()
    }

    pub fn adjacency(&self) -> &SparseSymmetricMatrix {
        &self.adjacency
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Largest weighted degree; equals `max_degree` for 0/1 weights.
    pub fn max_row_sum(&self) -> f64 {
        self.max_row_sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shift {
    /// `c` = largest weighted degree, the smallest Gershgorin-safe shift.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SpringKey {
    pub j: usize,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct WalkEmbedding {
    pub shift: f64,
    /// `T̃ = c𝟙 − T`.
    pub t_tilde: SparseSymmetricMatrix,
    /// `A = C = T̃`, `F = 0`.
    pub hamiltonian: QuadraticHamiltonian,
    /// `k_jk = T_jk` for `j < k` and `k_jj = c − Σ_k T_jk`.
    pub spring_constants: BTreeMap<SpringKey, f64>,
    /// Smallest eigenvalue of `T̃` when checked (up to `Limits::dense_modes`).
    pub min_eigenvalue: Option<f64>,
}

/// Shifts the walk Hamiltonian to `T̃ = c𝟙 − T` and builds the oscillator
/// network with `A = C = T̃`. With `strict`, a shift below the largest
/// weighted degree is rejected; otherwise positivity is only reported.
pub fn embed_walk(graph: &WalkGraph, shift: Shift, strict: bool, limits: &Limits) -> Result<WalkEmbedding> {
    let c = match shift {
        Shift::Auto => graph.max_row_sum(),
        Shift::Fixed(c) if c.is_finite() => c,
        Shift::Fixed(c) => return Err(Error::Parameter(format!("shift must be finite, got {c}"))),
    };
    if strict && c < graph.max_row_sum() {
        return Err(Error::NotPsd(format!(
            "shift {c} is below the largest weighted degree {}",
            graph.max_row_sum()
        )));
    }
    let m = graph.vertices();
    let t = graph.adjacency();
    let triplets = (0..m)
        .map(|j| (j, j, c))
        .chain(t.upper_entries().filter(|&(j, k, _)| j != k).map(|(j, k, w)| (j, k, -w)));
    let t_tilde = SparseSymmetricMatrix::from_triplets(m, triplets)?;

    let mut spring_constants = BTreeMap::new();
    for j in 0..m {
        spring_constants.insert(SpringKey { j, k: j }, c - t.slack(j));
    }
    for (j, k, w) in t.upper_entries() {
        if j != k && w != 0.0 {
            spring_constants.insert(SpringKey { j, k }, w);
        }
    }
    let min_eigenvalue = (m <= limits.dense_modes).then(|| smallest_symmetric_eigenvalue(&t_tilde.to_dense()));
    let hamiltonian = QuadraticHamiltonian::inertial(t_tilde.clone(), t_tilde.clone())?;
    Ok(WalkEmbedding {
        shift: c,
        t_tilde,
        hamiltonian,
        spring_constants,
        min_eigenvalue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkCheck {
    /// `‖(⟨q⟩ + i⟨p⟩)(t) − exp(−iT̃t) amp0‖_∞`.
    pub deviation: f64,
    /// `|‖(⟨q⟩ + i⟨p⟩)(t)‖ − ‖amp0‖|`.
    pub norm_drift: f64,
    pub time: f64,
}

/// Evolves `⟨q⟩ + i⟨p⟩ = amp0` under the oscillator generator and compares
/// with the walk propagator computed from the eigenbasis of `T̃`.
pub fn verify_walk_equivalence(embedding: &WalkEmbedding, amp0: &[Complex64], t: f64) -> Result<WalkCheck> {
    let m = embedding.t_tilde.dim();
    if amp0.len() != m {
        return Err(Error::Structural(format!(
            "amplitude vector has length {}, expected {m}",
            amp0.len()
        )));
    }
    let z0 = DVector::from_iterator(2 * m, amp0.iter().map(|z| z.re).chain(amp0.iter().map(|z| z.im)));
    let evolved = evolve_first_moments(&embedding.hamiltonian, &z0, t)?;
    let bosonic: Vec<Complex64> = (0..m)
        .map(|j| Complex64::new(evolved.state[j], evolved.state[m + j]))
        .collect();
    let walk = walk_propagate(&embedding.t_tilde.to_dense(), amp0, t);
    let deviation = bosonic
        .iter()
        .zip(&walk)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).norm()));
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(WalkCheck {
        deviation,
        norm_drift: (norm(&bosonic) - norm(amp0)).abs(),
        time: t,
    })
}

/// `exp(−i T̃ t) amp0`.
pub fn walk_propagate(t_tilde: &DMatrix<f64>, amp0: &[Complex64], t: f64) -> Vec<Complex64> {
    if t == 0.0 {
        return amp0.to_vec();
    }
    let (vals, vecs) = symmetric_eigen(t_tilde);
    let u = unitary_from_symmetric(&vals, &vecs, -t);
    (u * DVector::from_column_slice(amp0)).iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn path2() -> WalkGraph {
        WalkGraph::from_edges(2, [(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn path_graph_embedding() {
        let e = embed_walk(&path2(), Shift::Fixed(1.0), true, &Limits::default()).unwrap();
        assert_eq!(e.t_tilde.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert_eq!(e.spring_constants[&SpringKey { j: 0, k: 1 }], 1.0);
        assert_eq!(e.spring_constants[&SpringKey { j: 0, k: 0 }], 0.0);
        assert_eq!(e.spring_constants[&SpringKey { j: 1, k: 1 }], 0.0);
        assert!(e.min_eigenvalue.unwrap().abs() < 1e-14);
        assert!(e.t_tilde.is_laplacian_stiffness(1e-12));
    }

    #[test]
    fn empty_graph_is_free() {
        let g = WalkGraph::from_edges(3, []).unwrap();
        let e = embed_walk(&g, Shift::Auto, true, &Limits::default()).unwrap();
        assert_eq!(e.shift, 0.0);
        assert_eq!(e.t_tilde.to_dense(), DMatrix::zeros(3, 3));
    }

    #[test]
    fn complete_graph_spectrum() {
        let g = WalkGraph::from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let e = embed_walk(&g, Shift::Auto, true, &Limits::default()).unwrap();
        assert_eq!(e.shift, 2.0);
        let (vals, _) = symmetric_eigen(&e.t_tilde.to_dense());
        for (got, want) in vals.iter().zip([0.0, 3.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn strict_shift() {
        let g = path2();
        assert!(matches!(
            embed_walk(&g, Shift::Fixed(0.5), true, &Limits::default()),
            Err(Error::NotPsd(_))
        ));
        let loose = embed_walk(&g, Shift::Fixed(0.5), false, &Limits::default()).unwrap();
        assert!(loose.min_eigenvalue.unwrap() < 0.0);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(WalkGraph::from_edges(2, [(0, 0, 1.0)]).is_err());
        assert!(WalkGraph::from_edges(2, [(0, 1, -1.0)]).is_err());
    }

    #[test]
    fn full_transfer_on_path() {
        let e = embed_walk(&path2(), Shift::Fixed(1.0), true, &Limits::default()).unwrap();
        let amp0 = [Complex64::new(1.0, 0.0), Complex64::default()];
        let check = verify_walk_equivalence(&e, &amp0, PI / 2.0).unwrap();
        assert!(check.deviation < 1e-8);
        // T̃ has spectrum {0, 2}, so e₁ moves entirely to e₂.
        let out = walk_propagate(&e.t_tilde.to_dense(), &amp0, PI / 2.0);
        assert!(out[0].norm() < 1e-12 && (out[1].norm() - 1.0).abs() < 1e-12);
        assert_eq!(verify_walk_equivalence(&e, &amp0, 0.0).unwrap().deviation, 0.0);
    }
}

#[cfg(test)]
mod properties {
    use super::WalkEmbedding;
    use crate::{embed_walk, evolve_first_moments, Limits, Shift, WalkGraph};
    use nalgebra::DVector;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn walk_shift_is_a_global_phase(seed in any::<u64>(), extra in 0.0f64..3.0, t in 0.0f64..4.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(2..10);
            let edges: Vec<_> = (0..m)
                .flat_map(|j| (j + 1..m).map(move |k| (j, k)))
                .filter(|_| rng.gen_bool(0.4))
                .map(|(j, k)| (j, k, 1.0))
                .collect();
            let graph = WalkGraph::from_edges(m, edges).unwrap();
            let limits = Limits::default();
            let base = embed_walk(&graph, Shift::Auto, true, &limits).unwrap();
            let shifted = embed_walk(&graph, Shift::Fixed(base.shift + extra), true, &limits).unwrap();
            let mut z0 = DVector::zeros(2 * m);
            z0[0] = 1.0;
            let amp = |e: &WalkEmbedding| {
                let s = evolve_first_moments(&e.hamiltonian, &z0, t).unwrap().state;
                (0..m).map(|j| Complex64::new(s[j], s[m + j])).collect::<Vec<_>>()
            };
            let phase = Complex64::from_polar(1.0, -extra * t);
            for (x, y) in amp(&base).iter().zip(amp(&shifted)) {
                prop_assert!((x * phase - y).norm() <= 1e-9);
            }
        }
    }
}
