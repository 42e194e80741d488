//! Heralded generation of pseudo-number states through a cross-Kerr phase
//! modulation between a signal mode and a coherent meter.

use serde::{Deserialize, Serialize};

use crate::algebra::{CoherentSuperposition, CoherentTerm, FockVector};
use crate::error::{Error, Result};
use crate::psp::{generation_probability, ln_normalization, pseudo_number_state, root_of_unity, PspParams};

/// Signal μ, meter ν, phase count d = 2π/(χt), detector efficiency η_det.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub mu: f64,
    pub nu: f64,
    pub d: u32,
    pub eta_det: f64,
}

impl GenerationParams {
    pub fn new(mu: f64, nu: f64, d: u32, eta_det: f64) -> Result<Self> {
        let g = GenerationParams { mu, nu, d, eta_det };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::invalid(format!("signal mean photon number {} must be > 0", self.mu)));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::invalid(format!("meter mean photon number {} must be > 0", self.nu)));
        }
        if self.d < 2 {
            return Err(Error::invalid(format!("phase count d = {} must be >= 2", self.d)));
        }
        if !(self.eta_det > 0.0 && self.eta_det <= 1.0) {
            return Err(Error::invalid(format!("detector efficiency {} outside (0, 1]", self.eta_det)));
        }
        Ok(())
    }

    /// True when √ν ≤ d, where neighbouring meter phases overlap too much
    /// for reliable heterodyne discrimination.
    pub fn discrimination_warning(&self) -> bool {
        self.nu.sqrt() <= self.d as f64
    }
}

/// Σ_j (√N_{μ,j}/d) |j_d⟩ ⊗ |√ν ω^j⟩, with each |j_d⟩ expanded into coherent terms.
pub fn cpm_output(g: &GenerationParams) -> Result<CoherentSuperposition> {
    g.validate()?;
    let d = g.d;
    let mut terms = Vec::with_capacity((d * d) as usize);
    for j in 0..d {
        let ln_n = ln_normalization(g.mu, d, j)?;
        if ln_n == f64::NEG_INFINITY {
            continue;
        }
        let weight = (0.5 * ln_n).exp() / d as f64;
        let meter = root_of_unity(d, j as f64) * g.nu.sqrt();
        let signal = pseudo_number_state(&PspParams::new(g.mu, d, j)?)?;
        for t in signal.terms() {
            terms.push(CoherentTerm::new(t.coeff * weight, vec![t.labels[0], meter]));
        }
    }
    CoherentSuperposition::new(2, terms)
}

/// e^{i(2π/d) n₁n₂} |√μ⟩|√ν⟩ written directly as
/// Σ_{q,j} (ω^{-jq}/d) |√μ ω^q⟩|√ν ω^j⟩.
pub fn cpm_output_direct(g: &GenerationParams) -> Result<CoherentSuperposition> {
    g.validate()?;
    let d = g.d;
    let mut terms = Vec::with_capacity((d * d) as usize);
    for j in 0..d {
        let meter = root_of_unity(d, j as f64) * g.nu.sqrt();
        for q in 0..d {
            let coeff = root_of_unity(d, -(j as f64) * q as f64) / d as f64;
            terms.push(CoherentTerm::new(coeff, vec![root_of_unity(d, q as f64) * g.mu.sqrt(), meter]));
        }
    }
    CoherentSuperposition::new(2, terms)
}

/// Applies e^{i(2π/d) n_a n_b} to a truncated two-mode vector.
pub fn fock_cross_kerr(state: &FockVector, d: u32) -> Result<FockVector> {
    if state.mode_count() != 2 {
        return Err(Error::ModeMismatch {
            expected: 2,
            found: state.mode_count(),
        });
    }
    if d == 0 {
        return Err(Error::invalid("phase count d must be >= 1"));
    }
    Ok(state.map_indexed(|ns, a| a * root_of_unity(d, ((ns[0] * ns[1]) as u64 % d as u64) as f64)))
}

/// Probabilities P_{μ,j} of heralding |j_d⟩, j = 0..d-1.
pub fn herald_probabilities(g: &GenerationParams) -> Result<Vec<f64>> {
    g.validate()?;
    (0..g.d).map(|j| generation_probability(g.mu, g.d, j)).collect()
}

/// Denominator applied to η_det ν |ω^j - ω|² in the trigger exponent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TriggerConvention {
    /// exp[-η_det ν |ω^j - ω|² / 4]
    #[default]
    Paper,
    /// exp[-η_det ν |ω^j - ω|² / 2] = |⟨0|√(η_det ν)(ω^j - ω)/√2⟩|²
    Recomputed,
}

impl TriggerConvention {
    fn denominator(self) -> f64 {
        match self {
            TriggerConvention::Paper => 4.0,
            TriggerConvention::Recomputed => 2.0,
        }
    }
}

fn trigger_exponent(g: &GenerationParams, j: u32, convention: TriggerConvention) -> Result<f64> {
    g.validate()?;
    if j >= g.d {
        return Err(Error::invalid(format!("index j = {j} must lie in [0, {}]", g.d - 1)));
    }
    let gap = (root_of_unity(g.d, j as f64) - root_of_unity(g.d, 1.0)).norm_sqr();
    let gap = if j == 1 { 0.0 } else { gap };
    Ok(-g.eta_det * g.nu * gap / convention.denominator())
}

/// η⁽ᵗ⁾_{ν,j}: probability that the displaced meter leaves the lower
/// detector dark when |j_d⟩ was generated. Exactly 1 for j = 1.
pub fn trigger_probability(g: &GenerationParams, j: u32, convention: TriggerConvention) -> Result<f64> {
    trigger_exponent(g, j, convention).map(f64::exp)
}

/// η⁽ⁿᵗ⁾_{ν,j} = 1 - η⁽ᵗ⁾_{ν,j}, evaluated without cancellation.
pub fn nontrigger_probability(g: &GenerationParams, j: u32, convention: TriggerConvention) -> Result<f64> {
    trigger_exponent(g, j, convention).map(|x| -x.exp_m1())
}

/// Meter state |√ν ω^j⟩ conditioned on the signal having been found in |j_d⟩.
pub fn meter_state(g: &GenerationParams, j: u32) -> CoherentSuperposition {
    CoherentSuperposition::coherent(&[root_of_unity(g.d, j as f64) * g.nu.sqrt()])
}
