//! Feynman-Kitaev construction that turns postselected circuits into
//! amplified oscillator dynamics.

pub mod alt;
pub mod circuit;
pub mod clock;
pub mod fk;
pub mod postbqp;

pub use alt::{build_alt_family, AltFamily, AltInstance, AltReport};
pub use circuit::{brute_force_postselect, Circuit, Gate, PostselectOutcome};
pub use clock::{solve_clock_spectrum, BoundState, ClockSpectrum};
pub use fk::{build_fk, FkInstance, FkOptions};
pub use postbqp::{run_postbqp, DecisionStatus, FinalTime, PostselectionDecision};
