//! Spectrum of the clock chain and its bound state.

use serde::Serialize;

use crate::error::{Error, Result};

/// `κ₀ = acosh 2 = ln(2 + √3)`, where the bound-state energy crosses zero.
pub fn kappa0() -> f64 {
    (2.0 + 3f64.sqrt()).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainMode {
    /// `γ_l = 4 − 2cos(πl/(L+3))`.
    pub gamma: f64,
    /// `φ_l(l') = √(2/(L+3)) sin(l l' π/(L+3))`, `l' = 1..=L+2`.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundState {
    pub kappa1: f64,
    /// `α₁ = 4 − 2cosh κ₁`.
    pub alpha1: f64,
    /// `|⟨l=1|χ₁⟩|²`.
    pub overlap_first: f64,
    /// `|⟨l=L+1|χ₁⟩|²`.
    pub overlap_readout: f64,
    /// `c₁` in `χ₁(l') = c₁ sinh(l'κ₁)`.
    pub normalization: f64,
}

impl BoundState {
    /// `χ₁(l')` for `l' = 1..=layers`.
    pub fn vector(&self, layers: usize) -> Vec<f64> {
        (1..=layers)
            .map(|l| self.normalization * (l as f64 * self.kappa1).sinh())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClockSpectrum {
    pub layers: usize,
    pub beta: f64,
    pub x0_modes: Vec<ChainMode>,
    pub bound_state: Option<BoundState>,
    /// Smallest `β` with a negative eigenvalue of `X₁`.
    pub beta_threshold: f64,
}

/// `g(κ) = cosh κ + sinh κ coth((L+2)κ)`.
pub fn quantization(kappa: f64, layers: usize) -> f64 {
    kappa.cosh() + kappa.sinh() / (layers as f64 * kappa).tanh()
}

/// `X₀` modes in closed form and the negative-energy bound state of `X₁`
/// (chain of `L+2` sites) from the quantization condition `g(κ) = β²`.
pub fn solve_clock_spectrum(beta: f64, gates: usize) -> Result<ClockSpectrum> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Parameter(format!("beta must be finite and nonnegative, got {beta}")));
    }
    let layers = gates + 2;
    let denom = (layers + 1) as f64;
    let pi = std::f64::consts::PI;
    let x0_modes = (1..=layers)
        .map(|l| ChainMode {
            gamma: 4.0 - 2.0 * (pi * l as f64 / denom).cos(),
            vector: (1..=layers)
                .map(|lp| (2.0 / denom).sqrt() * ((l * lp) as f64 * pi / denom).sin())
                .collect(),
        })
        .collect();
    let threshold_sq = quantization(kappa0(), layers);
    let beta_sq = beta * beta;
    let bound_state = if beta_sq <= threshold_sq {
        None
    } else {
        Some(bound_state(beta_sq, layers)?)
    };
    Ok(ClockSpectrum {
        layers,
        beta,
        x0_modes,
        bound_state,
        beta_threshold: threshold_sq.sqrt(),
    })
}

fn bound_state(beta_sq: f64, layers: usize) -> Result<BoundState> {
    let target = |k: f64| quantization(k, layers) - beta_sq;
    let (mut lo, mut hi) = (1e-8, beta_sq.acosh());
    let (flo, fhi) = (target(lo), target(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Numerical(format!(
            "quantization condition not bracketed on [{lo:e}, {hi}]: g-β² = {flo:e}, {fhi:e}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if target(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kappa1 = 0.5 * (lo + hi);
    let norm_sq: f64 = (1..=layers).map(|l| (l as f64 * kappa1).sinh().powi(2)).sum();
    let c1 = norm_sq.sqrt().recip();
    let at = |l: usize| (c1 * (l as f64 * kappa1).sinh()).powi(2);
    Ok(BoundState {
        kappa1,
        alpha1: 4.0 - 2.0 * kappa1.cosh(),
        overlap_first: at(1),
        overlap_readout: at(layers - 1),
        normalization: c1,
    })
}
