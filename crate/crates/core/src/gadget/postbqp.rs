//! Postselection by amplification of the clock bound state.

use nalgebra::DVector;
use serde::Serialize;

use super::circuit::{brute_force_postselect, Circuit, PostselectOutcome};
use super::clock::{solve_clock_spectrum, BoundState};
use super::fk::{build_fk, FkInstance, FkOptions};
use crate::config::Limits;
use crate::dynamics::SecondOrderPropagator;
use crate::error::{Error, Result};
use crate::factor::GreekIndex;
use crate::readout::IndexSetSpec;

/// Amplification `W(t_f)` targeted by the automatic final time.
pub const TARGET_AMPLIFICATION: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FinalTime {
    /// Smallest integer time with `W(t_f) >= TARGET_AMPLIFICATION`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionStatus {
    Reliable,
    /// `X₁` has no negative eigenvalue, so nothing is amplified.
    NoBoundState,
    /// The readout layer carries no postselected weight at `t_f`.
    EmptyDenominator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostselectionDecision {
    pub zeta_num: f64,
    pub zeta_den: f64,
    pub ratio: f64,
    pub accept: bool,
    pub status: DecisionStatus,
    pub t_final: f64,
    /// `W(t_f) = δ cosh(√(−α₁) t_f) |⟨L+1|χ₁⟩⟨χ₁|1⟩|`.
    pub amplification: Option<f64>,
    pub delta: Option<f64>,
    pub oracle_value: Option<f64>,
    pub bound_state: Option<BoundState>,
}

/// Mode lists `(I_num, I_den)` at clock layer `L+1`: `1_P 1_Q j_R` and
/// `1_P b_Q j_R` over all remaining labels.
pub fn readout_modes(fk: &FkInstance) -> (Vec<usize>, Vec<usize>) {
    let dim = fk.circuit().basis_dim();
    let (p_bit, q_bit) = (dim >> 1, dim >> 2);
    let layer = fk.layers() - 1;
    let den: Vec<usize> = (0..dim).filter(|b| b & p_bit != 0).map(|b| fk.mode_index(layer, b)).collect();
    let num = (0..dim)
        .filter(|b| b & p_bit != 0 && b & q_bit != 0)
        .map(|b| fk.mode_index(layer, b))
        .collect();
    (num, den)
}

/// The same sets as greek first-order momentum labels. With `C = 𝟙` the
/// momentum coordinate `z_(m,m)bar` is `p_m` itself.
pub fn readout_specs(fk: &FkInstance) -> (IndexSetSpec, IndexSetSpec) {
    let spec = |modes: &[usize]| {
        let mut s = IndexSetSpec::empty();
        for &m in modes {
            s.templates.extend(IndexSetSpec::exact(&[GreekIndex::new(m, m, true)]).templates);
        }
        s
    };
    let (num, den) = readout_modes(fk);
    (spec(&num), spec(&den))
}

fn auto_time(bound: &BoundState, delta: f64) -> f64 {
    let w = (-bound.alpha1).sqrt();
    let weight = delta * (bound.overlap_first * bound.overlap_readout).sqrt();
    let need = (TARGET_AMPLIFICATION / weight).max(1.0);
    (need.acosh() / w).ceil()
}

/// Runs the gadget: `q(0) = 0`, `q̇(0) = e_(l=1, b=0)`, closed-form
/// evolution under `Ã`, then `p = q̇ + βΠq` read at layer `L+1`.
pub fn run_postbqp(
    circuit: &Circuit,
    options: FkOptions,
    final_time: FinalTime,
    limits: &Limits,
) -> Result<PostselectionDecision> {
    let oracle: Option<PostselectOutcome> = match brute_force_postselect(circuit) {
        Ok(o) => Some(o),
        Err(Error::PostselectionImpossible(_)) if matches!(final_time, FinalTime::Fixed(_)) => None,
        Err(e) => return Err(e),
    };
    let fk = build_fk(circuit, options, limits)?;
    let spectrum = solve_clock_spectrum(options.beta, circuit.len())?;
    let bound = spectrum.bound_state;
    let t_final = match final_time {
        FinalTime::Fixed(t) if t.is_finite() && t >= 0.0 => t,
        FinalTime::Fixed(t) => return Err(Error::Parameter(format!("final time must be finite and >= 0, got {t}"))),
        FinalTime::Auto => match (bound, oracle) {
            (Some(b), Some(o)) => auto_time(&b, o.delta),
            _ => fk.layers() as f64,
        },
    };

    let m = fk.modes();
    let mut qdot0 = DVector::zeros(m);
    qdot0[fk.mode_index(1, 0)] = 1.0;
    let propagator = SecondOrderPropagator::new(fk.a_tilde())?;
    let (q, qdot) = propagator.evolve(&DVector::zeros(m), &qdot0, t_final);
    let mut p = qdot;
    for &j in fk.projector_modes() {
        p[j] += options.beta * q[j];
    }
    if !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical(format!("momenta overflowed at t_f = {t_final}")));
    }

    let (num, den) = readout_modes(&fk);
    let zeta_num: f64 = num.iter().map(|&j| p[j] * p[j]).sum();
    let zeta_den: f64 = den.iter().map(|&j| p[j] * p[j]).sum();
    let ratio = if zeta_den > 0.0 { zeta_num / zeta_den } else { 0.0 };
    let status = if bound.is_none() {
        DecisionStatus::NoBoundState
    } else if zeta_den == 0.0 {
        DecisionStatus::EmptyDenominator
    } else {
        DecisionStatus::Reliable
    };
    let amplification = match (bound, oracle) {
        (Some(b), Some(o)) => {
            Some(o.delta * ((-b.alpha1).sqrt() * t_final).cosh() * (b.overlap_first * b.overlap_readout).sqrt())
        }
        _ => None,
    };
    Ok(PostselectionDecision {
        zeta_num,
        zeta_den,
        ratio,
        accept: ratio > 0.5,
        status,
        t_final,
        amplification,
        delta: oracle.map(|o| o.delta),
        oracle_value: oracle.map(|o| o.outcome),
        bound_state: bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::circuit::Gate;

    #[test]
    fn deterministic_reject() {
        let c = Circuit::new(2, vec![Gate::H { target: 0 }]).unwrap();
        let d = run_postbqp(&c, FkOptions::new(3.0), FinalTime::Auto, &Limits::default()).unwrap();
        assert_eq!(d.status, DecisionStatus::Reliable);
        assert!(d.amplification.unwrap() >= TARGET_AMPLIFICATION);
        assert!((d.ratio - d.oracle_value.unwrap()).abs() < 1e-3);
        assert!(!d.accept);
    }

    #[test]
    fn balanced_outcome() {
        let c = Circuit::new(
            3,
            vec![Gate::H { target: 0 }, Gate::H { target: 2 }, Gate::Ccx { c1: 0, c2: 2, target: 1 }],
        )
        .unwrap();
        let d = run_postbqp(&c, FkOptions::new(3.0), FinalTime::Auto, &Limits::default()).unwrap();
        assert!((d.oracle_value.unwrap() - 0.5).abs() < 1e-12);
        assert!((d.ratio - 0.5).abs() < 1e-3);
    }

    #[test]
    fn no_bound_state_is_flagged() {
        let c = Circuit::new(2, vec![Gate::H { target: 0 }, Gate::H { target: 1 }]).unwrap();
        let opts = FkOptions {
            beta: 0.0,
            allow_weak_beta: true,
        };
        let d = run_postbqp(&c, opts, FinalTime::Auto, &Limits::default()).unwrap();
        assert_eq!(d.status, DecisionStatus::NoBoundState);
        assert!(d.amplification.is_none());
    }

    #[test]
    fn zero_time_has_empty_readout() {
        let c = Circuit::new(2, vec![Gate::H { target: 0 }]).unwrap();
        let d = run_postbqp(&c, FkOptions::new(3.0), FinalTime::Fixed(0.0), &Limits::default()).unwrap();
        assert_eq!(d.status, DecisionStatus::EmptyDenominator);
        assert_eq!(d.zeta_den, 0.0);
    }

    #[test]
    fn impossible_postselection() {
        let c = Circuit::new(2, vec![Gate::H { target: 1 }]).unwrap();
        assert!(matches!(
            run_postbqp(&c, FkOptions::new(3.0), FinalTime::Auto, &Limits::default()),
            Err(Error::PostselectionImpossible(_))
        ));
        let fixed = run_postbqp(&c, FkOptions::new(3.0), FinalTime::Fixed(5.0), &Limits::default()).unwrap();
        assert!(fixed.oracle_value.is_none());
    }

    #[test]
    fn readout_sets_are_nested() {
        let c = Circuit::new(3, vec![Gate::H { target: 0 }]).unwrap();
        let fk = build_fk(&c, FkOptions::new(3.0), &Limits::default()).unwrap();
        let (num, den) = readout_modes(&fk);
        assert_eq!((num.len(), den.len()), (2, 4));
        assert!(num.iter().all(|m| den.contains(m)));
        let (ns, ds) = readout_specs(&fk);
        assert_eq!((ns.templates.len(), ds.templates.len()), (2, 4));
    }
}
