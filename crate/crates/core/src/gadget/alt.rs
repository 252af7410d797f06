//! Alternative hard families: the doubled system with an antisymmetric
//! coupling, and the indefinite-stiffness family.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::circuit::Circuit;
use super::fk::{build_fk, FkInstance, FkOptions};
use crate::config::Limits;
use crate::dynamics::evolve_first_moments;
use crate::error::Result;
use crate::hamiltonian::QuadraticHamiltonian;
use crate::linalg::max_abs;
use crate::sparse::{SparseMatrix, SparseSymmetricMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AltFamily {
    EminusDoubled,
    IndefiniteA,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubledReport {
    /// `‖E⁻C + CE⁻‖_max`.
    pub anticommutator: f64,
    /// `‖(E⁻)² + β²Π⊗𝟙‖_max`.
    pub square: f64,
    /// `‖CA − A_FK⊗𝟙‖_max`.
    pub fk_product: f64,
    /// `‖(E⁻)² + CA − Ã⊗𝟙‖_max`.
    pub identity: f64,
    /// `‖(CA − (E⁻)²) − Ã⊗𝟙‖_max`. Eliminating `p` from Heisenberg's
    /// equations gives `q̈ = −(CA − (E⁻)²) q`, so this is the gap between
    /// that generator and `Ã⊗𝟙`; it equals `2β²`.
    pub heisenberg_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndefiniteReport {
    /// Largest relative deviation `‖q_alt(t) − q_gadget(t)‖_∞ / ‖q_gadget(t)‖_∞`
    /// over the checked times.
    pub q_deviation: f64,
    pub times: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AltReport {
    EminusDoubled(DoubledReport),
    IndefiniteA(IndefiniteReport),
}

#[derive(Debug, Clone)]
pub struct AltInstance {
    pub family: AltFamily,
    pub a: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub report: AltReport,
}

impl AltInstance {
    pub fn hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        QuadraticHamiltonian::new(
            SparseSymmetricMatrix::from_dense(&self.a)?,
            SparseSymmetricMatrix::from_dense(&self.c)?,
            SparseMatrix::from_dense(&self.f)?,
        )
    }
}

/// Times at which the indefinite family is compared with the gadget.
pub const INDEFINITE_CHECK_TIMES: [f64; 3] = [0.5, 1.0, 2.0];

pub fn build_alt_family(
    circuit: &Circuit,
    options: FkOptions,
    family: AltFamily,
    limits: &Limits,
) -> Result<AltInstance> {
    let fk = build_fk(circuit, options, limits)?;
    match family {
        AltFamily::EminusDoubled => Ok(doubled(&fk)),
        AltFamily::IndefiniteA => indefinite(&fk),
    }
}

/// Doubled modes are indexed `2·mode + copy`.
fn doubled(fk: &FkInstance) -> AltInstance {
    let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let id2 = DMatrix::<f64>::identity(2, 2);
    let m = fk.modes();
    let beta = fk.beta();
    let pi = fk.projector();

    let a = fk.a().kronecker(&z);
    let c = DMatrix::<f64>::identity(m, m).kronecker(&z);
    let e_minus = (&pi * beta).kronecker(&j);
    let e2 = &e_minus * &e_minus;
    let ca = &c * &a;
    let tilde = fk.a_tilde().kronecker(&id2);
    let report = DoubledReport {
        anticommutator: max_abs(&(&e_minus * &c + &c * &e_minus)),
        square: max_abs(&(&e2 + (&pi * (beta * beta)).kronecker(&id2))),
        fk_product: max_abs(&(&ca - fk.a().kronecker(&id2))),
        identity: max_abs(&(&e2 + &ca - &tilde)),
        heisenberg_offset: max_abs(&(&ca - &e2 - &tilde)),
    };
    AltInstance {
        family: AltFamily::EminusDoubled,
        a,
        c,
        f: e_minus,
        report: AltReport::EminusDoubled(report),
    }
}

fn indefinite(fk: &FkInstance) -> Result<AltInstance> {
    let m = fk.modes();
    let alt = AltInstance {
        family: AltFamily::IndefiniteA,
        a: fk.a_tilde().clone(),
        c: DMatrix::identity(m, m),
        f: DMatrix::zeros(m, m),
        report: AltReport::IndefiniteA(IndefiniteReport {
            q_deviation: 0.0,
            times: INDEFINITE_CHECK_TIMES,
        }),
    };
    let gadget = fk.hamiltonian()?;
    let lifted = alt.hamiltonian()?;
    // q(0) = 0, p(0) = e_(l=1, b=0): both families start with q̇(0) = p(0).
    let mut z0 = DVector::zeros(2 * m);
    z0[m + fk.mode_index(1, 0)] = 1.0;
    let mut worst = 0.0f64;
    for &t in &INDEFINITE_CHECK_TIMES {
        let g = evolve_first_moments(&gadget, &z0, t)?.state;
        let l = evolve_first_moments(&lifted, &z0, t)?.state;
        let (gq, lq) = (g.rows(0, m), l.rows(0, m));
        worst = worst.max((gq - lq).amax() / gq.amax());
    }
    Ok(AltInstance {
        report: AltReport::IndefiniteA(IndefiniteReport {
            q_deviation: worst,
            times: INDEFINITE_CHECK_TIMES,
        }),
        ..alt
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::circuit::Gate;

    #[test]
    fn doubled_identities_on_one_gate() {
        let c = Circuit::new(2, vec![Gate::H { target: 0 }]).unwrap();
        let alt = build_alt_family(&c, FkOptions::new(3.0), AltFamily::EminusDoubled, &Limits::default()).unwrap();
        let AltReport::EminusDoubled(r) = alt.report else {
            panic!("wrong family")
        };
        assert_eq!(r.anticommutator, 0.0);
        assert_eq!(r.square, 0.0);
        assert!(r.fk_product < 1e-12 && r.identity < 1e-12);
        assert!((r.heisenberg_offset - 18.0).abs() < 1e-12);
        assert_eq!(alt.a.nrows(), 24);
        // E⁻ is antisymmetric, so the Hamiltonian accepts it as F.
        assert!(alt.hamiltonian().is_ok());
    }

    #[test]
    fn indefinite_family_tracks_gadget() {
        let c = Circuit::new(2, vec![Gate::H { target: 0 }, Gate::H { target: 1 }]).unwrap();
        let alt = build_alt_family(&c, FkOptions::new(3.0), AltFamily::IndefiniteA, &Limits::default()).unwrap();
        let AltReport::IndefiniteA(r) = alt.report else {
            panic!("wrong family")
        };
        assert!(r.q_deviation < 1e-8, "{}", r.q_deviation);
    }
}
