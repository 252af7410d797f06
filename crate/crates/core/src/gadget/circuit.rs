//! Hadamard/Toffoli circuits and a statevector oracle.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest qubit count accepted by the statevector oracle.
pub const MAX_ORACLE_QUBITS: usize = 12;
/// Largest gate count accepted by the statevector oracle.
pub const MAX_ORACLE_GATES: usize = 64;

/// Qubits are 0-based here; qubit 0 is the postselected register P and
/// the most significant bit of a basis index, qubit 1 is the output Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Gate {
    H { target: usize },
    Ccx { c1: usize, c2: usize, target: usize },
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H { target } => vec![target],
            Gate::Ccx { c1, c2, target } => vec![c1, c2, target],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H { target } => write!(f, "H {}", target + 1),
            Gate::Ccx { c1, c2, target } => write!(f, "CCX {} {} {}", c1 + 1, c2 + 1, target + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if qubits < 2 {
            return Err(Error::Structural(format!(
                "need at least 2 qubits (P and Q), got {qubits}"
            )));
        }
        if gates.is_empty() {
            return Err(Error::Structural("circuit has no gates".into()));
        }
        for (i, g) in gates.iter().enumerate() {
            let q = g.qubits();
            if let Some(&bad) = q.iter().find(|&&x| x >= qubits) {
                return Err(Error::IndexOutOfRange(format!(
                    "gate {} uses qubit {} of {qubits}",
                    i + 1,
                    bad + 1
                )));
            }
            let mut sorted = q.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != q.len() {
                return Err(Error::Structural(format!("gate {} ({g}) repeats a qubit", i + 1)));
            }
        }
        Ok(Circuit { qubits, gates })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gate count `L`.
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn basis_dim(&self) -> usize {
        1 << self.qubits
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.qubits - 1 - qubit)
    }

    /// Dense matrix of one gate on the full register.
    pub fn gate_matrix(&self, gate: &Gate) -> DMatrix<f64> {
        let dim = self.basis_dim();
        let mut u = DMatrix::zeros(dim, dim);
        match *gate {
            Gate::H { target } => {
                let m = self.bit(target);
                let h = std::f64::consts::FRAC_1_SQRT_2;
                for b in 0..dim {
                    let lo = b & !m;
                    // column b: H|x⟩ = (|0⟩ + (−1)^x |1⟩)/√2 on the target bit
                    u[(lo, b)] = h;
                    u[(lo | m, b)] = if b & m == 0 { h } else { -h };
                }
            }
            Gate::Ccx { c1, c2, target } => {
                let (m1, m2, mt) = (self.bit(c1), self.bit(c2), self.bit(target));
                for b in 0..dim {
                    let out = if b & m1 != 0 && b & m2 != 0 { b ^ mt } else { b };
                    u[(out, b)] = 1.0;
                }
            }
        }
        u
    }

    /// Applies the circuit to `|0…0⟩`.
    pub fn run(&self) -> Vec<f64> {
        let dim = self.basis_dim();
        let mut psi = vec![0.0; dim];
        psi[0] = 1.0;
        for gate in &self.gates {
            match *gate {
                Gate::H { target } => {
                    let m = self.bit(target);
                    let h = std::f64::consts::FRAC_1_SQRT_2;
                    for b in (0..dim).filter(|b| b & m == 0) {
                        let (x0, x1) = (psi[b], psi[b | m]);
                        psi[b] = h * (x0 + x1);
                        psi[b | m] = h * (x0 - x1);
                    }
                }
                Gate::Ccx { c1, c2, target } => {
                    let (m1, m2, mt) = (self.bit(c1), self.bit(c2), self.bit(target));
                    for b in (0..dim).filter(|b| b & m1 != 0 && b & m2 != 0 && b & mt == 0) {
                        psi.swap(b, b | mt);
                    }
                }
            }
        }
        psi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PostselectOutcome {
    /// `δ = ‖⟨1_P| U |0…0⟩‖`.
    pub delta: f64,
    /// `‖⟨1_Q|Ψ₁⟩‖²` with `|Ψ₁⟩ = ⟨1_P| U |0…0⟩ / δ`.
    pub outcome: f64,
}

pub fn brute_force_postselect(circuit: &Circuit) -> Result<PostselectOutcome> {
    if circuit.qubits() > MAX_ORACLE_QUBITS {
        return Err(Error::scale("statevector qubits", circuit.qubits(), MAX_ORACLE_QUBITS));
    }
    if circuit.len() > MAX_ORACLE_GATES {
        return Err(Error::scale("statevector gates", circuit.len(), MAX_ORACLE_GATES));
    }
    let psi = circuit.run();
    let (p, q) = (circuit.bit(0), circuit.bit(1));
    let mut post = 0.0;
    let mut hit = 0.0;
    for (b, amp) in psi.iter().enumerate().filter(|(b, _)| b & p != 0) {
        post += amp * amp;
        if b & q != 0 {
            hit += amp * amp;
        }
    }
    if post == 0.0 {
        return Err(Error::PostselectionImpossible(
            "the circuit never sets the postselected qubit".into(),
        ));
    }
    Ok(PostselectOutcome {
        delta: post.sqrt(),
        outcome: hit / post,
    })
}
