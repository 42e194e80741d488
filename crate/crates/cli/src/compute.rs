//! Single-point evaluation of library quantities.

use std::collections::BTreeMap;

use psp_core::generation::{trigger_probability, GenerationParams, TriggerConvention};
use psp_core::metrics::{g2_zero_as_printed, g2_zero_closed, hom};
use psp_core::psp::{fidelity_to_number_state, generation_probability, loss_channel, normalization, PspParams};
use psp_core::qkd::{basis_fidelity_bound, basis_fidelity_exact, PhaseSet};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// |⟨j|j_d⟩|²
    Fidelity,
    /// g²(0) of |1_d⟩
    G2,
    /// N_{μ,j}
    Normalization,
    /// Probability of heralding |j_d⟩
    GenerationProbability,
    /// Coincidence probability after a 50:50 splitter
    P11,
    /// Overlap of the splitter output with the two-photon NOON state
    F2002,
    /// Fidelity between the X- and Y-basis encodings of |j_d⟩
    BasisFidelity,
    /// Fidelity between the lossy state and its two-term approximation
    LossFidelity,
    /// Probability that the trigger fires for |j_d⟩
    TriggerProbability,
}

/// Parameters of a single-point query; unset fields take the documented defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Query {
    pub mu: f64,
    pub d: u32,
    /// Defaults to 1, the pseudo-single-photon state.
    pub j: Option<u32>,
    /// Phase offset of the second input (HOM) in units of 2π/d.
    pub delta: f64,
    pub nu: Option<f64>,
    pub eta: Option<f64>,
    pub mu2: Option<f64>,
    pub d2: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub quantity: Quantity,
    pub value: f64,
    pub params: Query,
    pub diagnostics: BTreeMap<String, f64>,
}

fn need(name: &str, v: Option<f64>) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("--{name} is required for this quantity")))
}

pub fn evaluate(
    quantity: Quantity,
    q: &Query,
    trigger: TriggerConvention,
    phase_set: PhaseSet,
) -> Result<Evaluation, CliError> {
    if q.d == 0 {
        return Err(psp_core::Error::InvalidParameter("number of phases d must be >= 1".into()).into());
    }
    let j = q.j.unwrap_or(1 % q.d);
    let mut diagnostics = BTreeMap::new();
    let value = match quantity {
        Quantity::Fidelity => fidelity_to_number_state(&PspParams::new(q.mu, q.d, j)?)?,
        Quantity::G2 => {
            let g = g2_zero_closed(q.mu, q.d)?;
            diagnostics.insert("imaginary_residue".into(), g.residue);
            diagnostics.insert("as_printed".into(), g2_zero_as_printed(q.mu, q.d)?.value);
            g.value
        }
        Quantity::Normalization => normalization(q.mu, q.d, j)?,
        Quantity::GenerationProbability => generation_probability(q.mu, q.d, j)?,
        Quantity::P11 | Quantity::F2002 => {
            let first = PspParams::new(q.mu, q.d, j)?;
            let d2 = q.d2.unwrap_or(q.d);
            if d2 == 0 {
                return Err(psp_core::Error::InvalidParameter("number of phases d2 must be >= 1".into()).into());
            }
            let second = PspParams::new(q.mu2.unwrap_or(q.mu), d2, j % d2)?.with_delta(q.delta)?;
            let h = hom(&first, &second)?;
            diagnostics.insert("p11".into(), h.p11);
            diagnostics.insert("f2002".into(), h.f2002);
            if quantity == Quantity::P11 { h.p11 } else { h.f2002 }
        }
        Quantity::BasisFidelity => {
            let exact = basis_fidelity_exact(q.mu, q.d, j, phase_set)?;
            diagnostics.insert("exact".into(), exact);
            basis_fidelity_bound(q.mu, q.d, j)?
        }
        Quantity::LossFidelity => {
            let eta = need("eta", q.eta)?;
            let loss = loss_channel(&PspParams::new(q.mu, q.d, j)?, eta)?;
            for (k, w) in loss.class_weights.iter().enumerate() {
                diagnostics.insert(format!("class_weight_{k}"), *w);
            }
            loss.approximation_fidelity()?
                .ok_or_else(|| CliError::Config("the two-term loss approximation needs j = 1".into()))?
        }
        Quantity::TriggerProbability => {
            let nu = need("nu", q.nu)?;
            let g = GenerationParams::new(q.mu, nu, q.d, q.eta.unwrap_or(1.0))?;
            if g.discrimination_warning() {
                diagnostics.insert("sqrt_nu_over_d".into(), nu.sqrt() / q.d as f64);
            }
            trigger_probability(&g, j, trigger)?
        }
    };
    Ok(Evaluation { quantity, value, params: *q, diagnostics })
}
