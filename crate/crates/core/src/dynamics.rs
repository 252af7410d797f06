//! Time evolution of first moments and of encoded moment vectors.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Limits, ZERO_EIGEN_CUTOFF};
use crate::error::{Error, Result};
use crate::factor::{GreekSpace, IncidenceFactor, MomentVector};
use crate::hamiltonian::{generator_matrix, QuadraticHamiltonian};
use crate::krylov::{expi_action, KRYLOV_DIM};
use crate::linalg::{self, symmetric_eigen, unitary_from_symmetric};
use crate::sparse::CsrMatrix;

/// `H₀ = [[0, BᵀD], [DᵀB, 0]]` on the greek label space.
///
/// The two off-diagonal blocks are assembled independently so that the
/// Hermiticity residual is a genuine check.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    space: GreekSpace,
    matrix: CsrMatrix,
    upper_right: CsrMatrix,
    lower_left: CsrMatrix,
    max_abs_entry: f64,
    hermiticity_residual: f64,
}

impl EffectiveHamiltonian {
    pub fn space(&self) -> GreekSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// `BᵀD`.
    pub fn upper_right(&self) -> &CsrMatrix {
        &self.upper_right
    }

    /// `DᵀB`.
    pub fn lower_left(&self) -> &CsrMatrix {
        &self.lower_left
    }

    /// `‖H₀‖_max`.
    pub fn max_abs_entry(&self) -> f64 {
        self.max_abs_entry
    }

    /// `max |(BᵀD)_κλ − (DᵀB)_λκ|`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.hermiticity_residual
    }

    /// Gershgorin bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.matrix.nrows())
            .map(|r| self.matrix.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }
}

fn gram_block(left: &IncidenceFactor, right: &IncidenceFactor) -> BTreeMap<(usize, usize), f64> {
    let mut acc = BTreeMap::new();
    for mode in 0..left.source_dim() {
        for &(kappa, lv) in left.row(mode) {
            for &(lambda, rv) in right.row(mode) {
                *acc.entry((kappa, lambda)).or_insert(0.0) += lv * rv;
            }
        }
    }
    acc.retain(|_, v| *v != 0.0);
    acc
}

fn block_rows(entries: &BTreeMap<(usize, usize), f64>, n: usize, col_offset: usize) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); n];
    for (&(r, c), &v) in entries {
        rows[r].push((c + col_offset, v));
    }
    rows
}

pub fn effective_hamiltonian(b: &IncidenceFactor, d: &IncidenceFactor) -> Result<EffectiveHamiltonian> {
    if b.source_dim() != d.source_dim() {
        return Err(Error::Structural(format!(
            "B acts on {} modes but D on {}",
            b.source_dim(),
            d.source_dim()
        )));
    }
    let space = GreekSpace::new(b.source_dim());
    let p = space.pairs();
    let bd = gram_block(b, d);
    let db = gram_block(d, b);
    let hermiticity_residual = bd
        .iter()
        .map(|(&(r, c), &v)| (v - db.get(&(c, r)).copied().unwrap_or(0.0)).abs())
        .chain(
            db.iter()
                .filter(|(&(r, c), _)| !bd.contains_key(&(c, r)))
                .map(|(_, v)| v.abs()),
        )
        .fold(0.0, f64::max);

    let mut rows = block_rows(&bd, p, p);
    rows.extend(block_rows(&db, p, 0));
    let matrix = CsrMatrix::from_rows(2 * p, 2 * p, rows);
    Ok(EffectiveHamiltonian {
        space,
        max_abs_entry: matrix.max_abs(),
        matrix,
        upper_right: CsrMatrix::from_rows(p, p, block_rows(&bd, p, 0)),
        lower_left: CsrMatrix::from_rows(p, p, block_rows(&db, p, 0)),
        hermiticity_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolutionMethod {
    DenseExpm,
    EigenClosedForm,
    KrylovAction,
}

/// First moments `(q, p)` after evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstMomentEvolution {
    pub state: DVector<f64>,
    pub time: f64,
    pub method: EvolutionMethod,
    /// Set when the exponential overflowed; non-finite entries are then
    /// reported as signed infinities instead of NaN.
    pub overflowed: bool,
}

/// `z(t) = exp(t G) z0` by dense scaling and squaring.
pub fn evolve_first_moments(
    h: &QuadraticHamiltonian,
    z0: &DVector<f64>,
    t: f64,
) -> Result<FirstMomentEvolution> {
    let m = h.modes();
    if z0.len() != 2 * m {
        return Err(Error::Structural(format!(
            "initial vector has length {}, expected {}",
            z0.len(),
            2 * m
        )));
    }
    if !t.is_finite() {
        return Err(Error::Parameter("evolution time must be finite".into()));
    }
    if t == 0.0 {
        return Ok(FirstMomentEvolution {
            state: z0.clone(),
            time: t,
            method: EvolutionMethod::DenseExpm,
            overflowed: false,
        });
    }
    let propagator = linalg::expm(&(generator_matrix(h) * t));
    let mut state = &propagator * z0;
    let overflowed = !propagator.iter().all(|v| v.is_finite()) || !state.iter().all(|v| v.is_finite());
    if overflowed {
        for v in state.iter_mut() {
            if v.is_nan() {
                *v = f64::INFINITY;
            }
        }
    }
    Ok(FirstMomentEvolution {
        state,
        time: t,
        method: EvolutionMethod::DenseExpm,
        overflowed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorReport {
    pub order: usize,
    pub dim: usize,
    pub method: EvolutionMethod,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub state: MomentVector,
    pub time: f64,
    /// Krylov when any sector used it, otherwise the eigenbasis route.
    pub method: EvolutionMethod,
    /// Krylov error estimates plus the norm drift of eigenbasis sectors.
    pub residual_estimate: f64,
    pub sectors: Vec<SectorReport>,
}

/// Action of the Kronecker sum `Σ_j H₀^(j)` on a rank-`r` tensor.
fn kronecker_sum_apply(h: &CsrMatrix, rank: usize, x: &[Complex64], y: &mut [Complex64]) {
    let k = h.nrows();
    y.iter_mut().for_each(|z| *z = Complex64::default());
    for slot in 0..rank {
        let stride = k.pow((rank - 1 - slot) as u32);
        let block = stride * k;
        for outer in (0..x.len()).step_by(block) {
            for inner in 0..stride {
                h.apply_strided(x, y, outer + inner, stride);
            }
        }
    }
}

/// Evolves every rank-r sector under `exp(i t Σ_j H₀^(j))`; the vacuum
/// amplitude is left untouched.
///
/// Sectors of size up to `limits.dense_sector` use the eigenbasis of `H₀`
/// applied slot by slot; larger ones use the matrix-free Krylov action.
/// The tolerance `eps` is split evenly over the sectors.
pub fn evolve_moment_vector(
    h0: &EffectiveHamiltonian,
    psi: &MomentVector,
    t: f64,
    eps: f64,
    limits: &Limits,
) -> Result<EvolutionResult> {
    if psi.space != h0.space {
        return Err(Error::Structural(format!(
            "state has {} modes, H0 has {}",
            psi.space.modes, h0.space.modes
        )));
    }
    if !t.is_finite() || eps <= 0.0 {
        return Err(Error::Parameter("need finite t and eps > 0".into()));
    }
    let k = h0.dim();
    let orders: Vec<usize> = (1..=psi.order_max).collect();
    for &r in &orders {
        let dim = k.saturating_pow(r as u32);
        if dim > limits.max_sector {
            return Err(Error::scale(format!("rank-{r} sector"), dim, limits.max_sector));
        }
    }
    if t == 0.0 {
        return Ok(EvolutionResult {
            state: psi.clone(),
            time: t,
            method: EvolutionMethod::EigenClosedForm,
            residual_estimate: 0.0,
            sectors: Vec::new(),
        });
    }

    let needs_dense = orders.iter().any(|&r| k.pow(r as u32) <= limits.dense_sector);
    let unitary = needs_dense.then(|| {
        let (vals, vecs) = symmetric_eigen(&h0.to_dense());
        unitary_from_symmetric(&vals, &vecs, t)
    });
    let sector_tol = eps / orders.len().max(1) as f64;
    let norm_bound = h0.norm_bound();

    let evolved: Vec<Result<(usize, Vec<Complex64>, SectorReport)>> = orders
        .par_iter()
        .map(|&r| {
            let dim = k.pow(r as u32);
            let x = psi.sector_dense(r);
            let x_norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if x_norm == 0.0 {
                let method = if dim <= limits.dense_sector {
                    EvolutionMethod::EigenClosedForm
                } else {
                    EvolutionMethod::KrylovAction
                };
                return Ok((r, x, SectorReport { order: r, dim, method, error_estimate: 0.0 }));
            }
            if let (true, Some(u)) = (dim <= limits.dense_sector, unitary.as_ref()) {
                let y = linalg::apply_on_all_slots(u, r, &x);
                let y_norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let report = SectorReport {
                    order: r,
                    dim,
                    method: EvolutionMethod::EigenClosedForm,
                    error_estimate: (y_norm - x_norm).abs(),
                };
                Ok((r, y, report))
            } else {
                let apply = |a: &[Complex64], b: &mut [Complex64]| kronecker_sum_apply(h0.matrix(), r, a, b);
                let (y, stats) = expi_action(
                    apply,
                    &x,
                    t,
                    sector_tol,
                    norm_bound * r as f64,
                    KRYLOV_DIM,
                )?;
                let report = SectorReport {
                    order: r,
                    dim,
                    method: EvolutionMethod::KrylovAction,
                    error_estimate: stats.error_estimate,
                };
                Ok((r, y, report))
            }
        })
        .collect();

    let mut state = psi.clone();
    let mut sectors = Vec::with_capacity(orders.len());
    for item in evolved {
        let (r, y, report) = item?;
        state.set_sector_dense(r, &y);
        sectors.push(report);
    }
    sectors.sort_by_key(|s| s.order);
    let residual_estimate: f64 = sectors.iter().map(|s| s.error_estimate).sum();
    if residual_estimate > eps {
        return Err(Error::Numerical(format!(
            "evolution error estimate {residual_estimate:e} exceeds tolerance {eps:e}"
        )));
    }
    let method = if sectors.iter().any(|s| s.method == EvolutionMethod::KrylovAction) {
        EvolutionMethod::KrylovAction
    } else {
        EvolutionMethod::EigenClosedForm
    };
    Ok(EvolutionResult {
        state,
        time: t,
        method,
        residual_estimate,
        sectors,
    })
}

/// Closed-form solution of `q̈ = −Ã q` for symmetric, possibly indefinite `Ã`.
///
/// Each eigenmode uses `cos(√λ t)`, `sin(√λ t)/√λ` for `λ > 0`, the
/// hyperbolic continuation for `λ < 0`, and the free-particle limit
/// `1`, `t` when `|λ| <= 1e-12`.
#[derive(Debug, Clone)]
pub struct SecondOrderPropagator {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SecondOrderPropagator {
    pub fn new(a_tilde: &DMatrix<f64>) -> Result<Self> {
        if a_tilde.nrows() != a_tilde.ncols() {
            return Err(Error::Structural("generator must be square".into()));
        }
        let scale = linalg::max_abs(a_tilde).max(1.0);
        let asym = linalg::max_abs(&(a_tilde - a_tilde.transpose()));
        if asym > 1e-12 * scale {
            return Err(Error::Structural(format!(
                "generator is not symmetric (residual {asym:e})"
            )));
        }
        let (eigenvalues, eigenvectors) = symmetric_eigen(a_tilde);
        Ok(SecondOrderPropagator {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `(q(t), q̇(t))` from `(q(0), q̇(0))`.
    pub fn evolve(&self, q0: &DVector<f64>, qdot0: &DVector<f64>, t: f64) -> (DVector<f64>, DVector<f64>) {
        if t == 0.0 {
            return (q0.clone(), qdot0.clone());
        }
        let u = &self.eigenvectors;
        let a = u.tr_mul(q0);
        let b = u.tr_mul(qdot0);
        let mut q = DVector::zeros(a.len());
        let mut qdot = DVector::zeros(a.len());
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            let (c, s, ds) = mode_functions(lambda, t);
            q[i] = c * a[i] + s * b[i];
            qdot[i] = ds * a[i] + c * b[i];
        }
        (u * q, u * qdot)
    }
}

/// `(c, s, ċ)` with `c = cos(√λ t)`, `s = sin(√λ t)/√λ`, `ċ = −λ s`.
fn mode_functions(lambda: f64, t: f64) -> (f64, f64, f64) {
    if lambda.abs() <= ZERO_EIGEN_CUTOFF {
        (1.0, t, 0.0)
    } else if lambda > 0.0 {
        let w = lambda.sqrt();
        let s = (w * t).sin() / w;
        ((w * t).cos(), s, -lambda * s)
    } else {
        let w = (-lambda).sqrt();
        let s = (w * t).sinh() / w;
        ((w * t).cosh(), s, -lambda * s)
    }
}

pub fn closed_form_evolution(
    a_tilde: &DMatrix<f64>,
    q0: &DVector<f64>,
    qdot0: &DVector<f64>,
    t: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if q0.len() != a_tilde.nrows() || qdot0.len() != a_tilde.nrows() {
        return Err(Error::Structural("initial vectors do not match the generator".into()));
    }
    Ok(SecondOrderPropagator::new(a_tilde)?.evolve(q0, qdot0, t))
}

/// Query and gate counts for simulating `exp(i t H₀)` to error `eps`,
/// with every hidden constant set to 1. These are order-of-magnitude
/// indicators of the asymptotic bounds, not exact costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceEstimate {
    /// `Q = t K d ‖H₀‖_max + ln(1/eps)`.
    pub queries: f64,
    /// `G = Q ln²(M Q / eps)`.
    pub gates: f64,
}

/// `k` is the free multiplicative parameter of the query bound; it is
/// taken as given and not derived here.
pub fn resource_estimate(t: f64, k: f64, d: f64, h0_max: f64, eps: f64, modes: f64) -> Result<ResourceEstimate> {
    let args = [("t", t), ("K", k), ("d", d), ("h0max", h0_max), ("eps", eps), ("M", modes)];
    if let Some((name, v)) = args.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
    }
    let queries = t * k * d * h0_max + (1.0 / eps).ln();
    let gates = queries * (modes * queries / eps).ln().powi(2);
    Ok(ResourceEstimate { queries, gates })
}


#[cfg(test)]
mod properties {
    use crate::testutil::{instance, max_diff};
    use crate::{build_incidence_factor, effective_hamiltonian, evolve_moment_vector, Limits, MomentVector};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn evolution_is_unitary_and_additive(seed in any::<u64>(), t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
            let (h, psi) = instance(seed, 3, 2);
            let h0 = effective_hamiltonian(
                &build_incidence_factor(h.a()).unwrap(),
                &build_incidence_factor(h.c()).unwrap(),
            ).unwrap();
            let limits = Limits::default();
            let step = |s: &MomentVector, t| evolve_moment_vector(&h0, s, t, 1e-9, &limits).unwrap().state;
            let once = step(&psi, t1 + t2);
            let twice = step(&step(&psi, t1), t2);
            prop_assert!((once.norm() - 1.0).abs() <= 1e-10);
            prop_assert!(max_diff(&once, &twice) <= 1e-9);
            let back = step(&once, -(t1 + t2));
            prop_assert!(max_diff(&back, &psi) <= 1e-9);
        }
    }
}
