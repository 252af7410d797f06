//! Feynman-Kitaev oscillator network for a circuit.

use nalgebra::DMatrix;
use serde::Serialize;

use super::circuit::Circuit;
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::hamiltonian::QuadraticHamiltonian;
use crate::linalg::max_abs;
use crate::sparse::{SparseMatrix, SparseSymmetricMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkOptions {
    pub beta: f64,
    /// Accept `0 <= beta <= 2`, where no amplifying bound state is
    /// guaranteed.
    pub allow_weak_beta: bool,
}

impl FkOptions {
    pub fn new(beta: f64) -> Self {
        FkOptions {
            beta,
            allow_weak_beta: false,
        }
    }
}

/// Modes are indexed `(l − 1)·2ⁿ + b` for clock layer `l = 1..=L+2` and
/// computational basis state `b` (qubit P most significant).
#[derive(Debug, Clone)]
pub struct FkInstance {
    circuit: Circuit,
    beta: f64,
    a: DMatrix<f64>,
    a_tilde: DMatrix<f64>,
    projector_modes: Vec<usize>,
}

pub fn build_fk(circuit: &Circuit, options: FkOptions, limits: &Limits) -> Result<FkInstance> {
    let beta = options.beta;
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Parameter(format!("beta must be finite and nonnegative, got {beta}")));
    }
    if beta <= 2.0 && !options.allow_weak_beta {
        return Err(Error::Parameter(format!(
            "beta = {beta} does not exceed 2; pass the override to build anyway"
        )));
    }
    let layers = circuit.len() + 2;
    let dim = circuit.basis_dim();
    let modes = layers
        .checked_mul(dim)
        .filter(|&m| m <= limits.max_gadget_modes)
        .ok_or_else(|| Error::scale("gadget modes", layers.saturating_mul(dim), limits.max_gadget_modes))?;

    let mut a = DMatrix::from_diagonal_element(modes, modes, 4.0);
    // Layers l and l+1 are coupled by U_l; the final step l = L+1 is idle.
    for (l, gate) in circuit.gates().iter().enumerate() {
        let u = circuit.gate_matrix(gate);
        let (r0, c0) = (l * dim, (l + 1) * dim);
        for i in 0..dim {
            for j in 0..dim {
                // block (l, l+1) = −U_lᵀ, block (l+1, l) = −U_l
                a[(r0 + i, c0 + j)] -= u[(j, i)];
                a[(c0 + i, r0 + j)] -= u[(i, j)];
            }
        }
    }
    let (r0, c0) = ((layers - 2) * dim, (layers - 1) * dim);
    for i in 0..dim {
        a[(r0 + i, c0 + i)] -= 1.0;
        a[(c0 + i, r0 + i)] -= 1.0;
    }
    let asym = max_abs(&(&a - a.transpose()));
    if asym > 1e-14 {
        return Err(Error::Numerical(format!("assembled A is not symmetric ({asym:e})")));
    }

    let p_bit = dim >> 1;
    let projector_modes: Vec<usize> = (0..dim).filter(|b| b & p_bit != 0).map(|b| c0 + b).collect();
    let mut a_tilde = a.clone();
    for &m in &projector_modes {
        a_tilde[(m, m)] -= beta * beta;
    }
    Ok(FkInstance {
        circuit: circuit.clone(),
        beta,
        a,
        a_tilde,
        projector_modes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClockTransformReport {
    /// `‖S Ã Sᵀ − (X₀ ⊗ |0_P⟩⟨0_P| + X₁ ⊗ |1_P⟩⟨1_P|) ⊗ 𝟙‖_max`.
    pub residual: f64,
    /// `‖S Sᵀ − 𝟙‖_max`.
    pub orthogonality: f64,
}

impl FkInstance {
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn layers(&self) -> usize {
        self.circuit.len() + 2
    }

    pub fn modes(&self) -> usize {
        self.a.nrows()
    }

    pub fn mode_index(&self, layer: usize, basis: usize) -> usize {
        (layer - 1) * self.circuit.basis_dim() + basis
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// `Ã = A − (E⁺)² = A − β²Π`.
    pub fn a_tilde(&self) -> &DMatrix<f64> {
        &self.a_tilde
    }

    /// Modes in the range of `Π = |L+2⟩⟨L+2| ⊗ |1_P⟩⟨1_P| ⊗ 𝟙`.
    pub fn projector_modes(&self) -> &[usize] {
        &self.projector_modes
    }

    pub fn projector(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.modes(), self.modes());
        for &m in &self.projector_modes {
            p[(m, m)] = 1.0;
        }
        p
    }

    /// `E⁺ = −βΠ`.
    pub fn e_plus(&self) -> DMatrix<f64> {
        self.projector() * -self.beta
    }

    /// `H` with `A`, `C = 𝟙` and `F = E⁺`.
    pub fn hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        let m = self.modes();
        let a = SparseSymmetricMatrix::from_dense(&self.a)?;
        let f = SparseMatrix::from_triplets(m, self.projector_modes.iter().map(|&j| (j, j, -self.beta)))?;
        QuadraticHamiltonian::new(a, SparseSymmetricMatrix::identity(m), f)
    }

    /// `S = Σ_l |l⟩⟨l| ⊗ U_{L+1}⋯U_l`.
    pub fn clock_matrix(&self) -> DMatrix<f64> {
        let dim = self.circuit.basis_dim();
        let layers = self.layers();
        let mut s = DMatrix::zeros(self.modes(), self.modes());
        let mut suffix = DMatrix::<f64>::identity(dim, dim);
        s.view_mut(((layers - 1) * dim, (layers - 1) * dim), (dim, dim))
            .copy_from(&suffix);
        s.view_mut(((layers - 2) * dim, (layers - 2) * dim), (dim, dim))
            .copy_from(&suffix);
        for l in (0..self.circuit.len()).rev() {
            suffix = &suffix * self.circuit.gate_matrix(&self.circuit.gates()[l]);
            s.view_mut((l * dim, l * dim), (dim, dim)).copy_from(&suffix);
        }
        s
    }

    pub fn clock_transform(&self) -> ClockTransformReport {
        let s = self.clock_matrix();
        let conj = &s * &self.a_tilde * s.transpose();
        let layers = self.layers();
        let x0 = clock_chain(layers, 0.0);
        let x1 = clock_chain(layers, self.beta);
        let dim = self.circuit.basis_dim();
        let p_bit = dim >> 1;
        let mut want = DMatrix::zeros(self.modes(), self.modes());
        for l in 0..layers {
            for k in 0..layers {
                for b in 0..dim {
                    let x = if b & p_bit != 0 { &x1 } else { &x0 };
                    want[(l * dim + b, k * dim + b)] = x[(l, k)];
                }
            }
        }
        let id = DMatrix::<f64>::identity(self.modes(), self.modes());
        ClockTransformReport {
            residual: max_abs(&(conj - want)),
            orthogonality: max_abs(&(&s * s.transpose() - id)),
        }
    }
}

/// Tridiagonal clock chain with diagonal 4, off-diagonal −1 and the last
/// diagonal entry lowered by `beta²`.
pub fn clock_chain(layers: usize, beta: f64) -> DMatrix<f64> {
    let mut x = DMatrix::from_diagonal_element(layers, layers, 4.0);
    for l in 0..layers.saturating_sub(1) {
        x[(l, l + 1)] = -1.0;
        x[(l + 1, l)] = -1.0;
    }
    if layers > 0 {
        x[(layers - 1, layers - 1)] -= beta * beta;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::circuit::Gate;
    use crate::linalg::symmetric_eigen;

    fn weak(beta: f64) -> FkOptions {
        FkOptions {
            beta,
            allow_weak_beta: true,
        }
    }

    #[test]
    fn single_hadamard_dimensions() {
        let c = Circuit::new(2, vec![Gate::H { target: 0 }]).unwrap();
        let fk = build_fk(&c, FkOptions::new(3.0), &Limits::default()).unwrap();
        assert_eq!(fk.modes(), 12);
        assert_eq!(fk.projector_modes().len(), 2);
        let pi = fk.projector();
        assert_eq!(pi.trace(), 2.0);
        let e = fk.e_plus();
        assert!(max_abs(&(&e * &e - pi * 9.0)) < 1e-15);
        let report = fk.clock_transform();
        assert!(report.residual < 1e-10, "{}", report.residual);
        assert!(report.orthogonality < 1e-14);
    }

    #[test]
    fn zero_beta_spectrum_band() {
        let c = Circuit::new(
            3,
            vec![Gate::H { target: 0 }, Gate::Ccx { c1: 0, c2: 2, target: 1 }, Gate::H { target: 2 }],
        )
        .unwrap();
        let fk = build_fk(&c, weak(0.0), &Limits::default()).unwrap();
        assert_eq!(fk.e_plus(), DMatrix::zeros(fk.modes(), fk.modes()));
        assert_eq!(fk.a_tilde(), fk.a());
        let (vals, _) = symmetric_eigen(fk.a_tilde());
        assert!(vals.iter().all(|&v| v > 2.0 - 1e-12 && v < 6.0 + 1e-12));
        assert!(fk.clock_transform().residual < 1e-10);
    }

    #[test]
    fn weak_beta_needs_override() {
        let c = Circuit::new(2, vec![Gate::H { target: 0 }]).unwrap();
        assert!(build_fk(&c, FkOptions::new(1.5), &Limits::default()).is_err());
        assert!(build_fk(&c, weak(1.5), &Limits::default()).is_ok());
    }

    #[test]
    fn cap_is_enforced() {
        let c = Circuit::new(6, vec![Gate::H { target: 0 }; 5]).unwrap();
        let limits = Limits {
            max_gadget_modes: 100,
            ..Limits::default()
        };
        assert!(matches!(build_fk(&c, FkOptions::new(3.0), &limits), Err(Error::Scale { .. })));
    }

    #[test]
    fn identity_like_circuit_is_block_diagonal() {
        // H twice is the identity, but the layers still carry the gates;
        // the transformed matrix must be the plain chain on every branch.
        let c = Circuit::new(2, vec![Gate::H { target: 1 }, Gate::H { target: 1 }]).unwrap();
        let fk = build_fk(&c, FkOptions::new(2.5), &Limits::default()).unwrap();
        assert!(fk.clock_transform().residual < 1e-12);
    }

    #[test]
    fn hamiltonian_round_trip() {
        let c = Circuit::new(2, vec![Gate::H { target: 0 }]).unwrap();
        let fk = build_fk(&c, FkOptions::new(3.0), &Limits::default()).unwrap();
        let h = fk.hamiltonian().unwrap();
        assert_eq!(h.a().to_dense(), *fk.a());
        assert_eq!(h.f().to_dense(), fk.e_plus());
    }
}
