//! Moment dynamics of quadratic bosonic Hamiltonians: incidence-factor
//! encodings, the effective Hamiltonian on moment vectors, readouts,
//! quantum-walk embeddings and Feynman-Kitaev postselection gadgets,
//! each paired with a brute-force check.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod factor;
pub mod gadget;
pub mod hamiltonian;
pub mod io;
pub mod krylov;
pub mod linalg;
pub mod readout;
pub mod sparse;
pub mod walk;

#[cfg(test)]
mod testutil;

pub use config::Limits;
pub use dynamics::{
    closed_form_evolution, effective_hamiltonian, evolve_first_moments, evolve_moment_vector,
    resource_estimate, EffectiveHamiltonian, EvolutionMethod, EvolutionResult,
};
pub use error::{Error, Result};
pub use factor::{
    build_incidence_factor, encode_state, to_greek_moments, CartesianMoments, GreekIndex, GreekMoments,
    GreekSpace, IncidenceFactor, MomentVector,
};
pub use hamiltonian::{classify, decompose_generator, validate, HamiltonianClass, HamiltonianTag, QuadraticHamiltonian};
pub use readout::{decide, reconstruct, zeta, Decision, IndexSetSpec, ReconstructionTarget};
pub use sparse::{SparseMatrix, SparseSymmetricMatrix};
pub use walk::{embed_walk, verify_walk_equivalence, Shift, WalkGraph};
