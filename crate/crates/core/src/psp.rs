//! Pseudo-number states |j_d⟩ = N^{-1/2} Σ_q ω^{-jq} |√μ ω^{q+δ}⟩, ω = e^{2πi/d}.
//!
//! |j_d⟩ is supported on photon numbers n ≡ j (mod d), so all scalar
//! characteristics reduce to Poisson series over that class. Those series are
//! the primary route here; overlap double sums are kept as cross-checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    Amplitude, CoherentDyadOperator, CoherentSuperposition, CoherentTerm, Cutoff, Dyad,
};
use crate::error::{Error, Result};
use crate::special::{class_mass, ln_poisson, PhotonClass};

/// ω^k = exp(2πi k / d) for real k (the integer part is reduced mod d first).
pub fn root_of_unity(d: u32, k: f64) -> Amplitude {
    let d_f = d as f64;
    let whole = k.floor();
    let reduced = whole.rem_euclid(d_f) + (k - whole);
    Amplitude::from_polar(1.0, 2.0 * PI * reduced / d_f)
}

/// (μ, d, j, δ) identifying one pseudo-number state. δ is measured in units
/// of 2π/d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PspParams {
    pub mu: f64,
    pub d: u32,
    pub j: u32,
    pub delta: f64,
}

impl PspParams {
    pub fn new(mu: f64, d: u32, j: u32) -> Result<Self> {
        let p = PspParams {
            mu,
            d,
            j,
            delta: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// The pseudo-single-photon state |1_d⟩.
    pub fn single_photon(mu: f64, d: u32) -> Result<Self> {
        Self::new(mu, d, 1 % d.max(1))
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        validate_class(self.mu, self.d, self.j)?;
        if !self.delta.is_finite() {
            return Err(Error::invalid("reference phase must be finite"));
        }
        if self.j != 0 && self.mu == 0.0 {
            return Err(Error::Degenerate(format!(
                "|{}_{}> has no support at mu = 0",
                self.j, self.d
            )));
        }
        Ok(())
    }

    /// Coherent label √μ ω^{q+δ}.
    pub fn label(&self, q: u32) -> Amplitude {
        root_of_unity(self.d, q as f64 + self.delta) * self.mu.sqrt()
    }
}

fn validate_class(mu: f64, d: u32, j: u32) -> Result<()> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::invalid(format!("mean photon number {mu} must be finite and >= 0")));
    }
    if d == 0 {
        return Err(Error::invalid("number of phases d must be >= 1"));
    }
    if j >= d {
        return Err(Error::invalid(format!("index j = {j} must lie in [0, {}]", d - 1)));
    }
    Ok(())
}

fn validate_state(mu: f64, d: u32, j: u32) -> Result<()> {
    PspParams {
        mu,
        d,
        j,
        delta: 0.0,
    }
    .validate()
}

/// ln N_{μ,j} = ln(d² e^{-μ} Σ_{n≡j} μⁿ/n!).
pub fn ln_normalization(mu: f64, d: u32, j: u32) -> Result<f64> {
    validate_state(mu, d, j)?;
    Ok(2.0 * (d as f64).ln() + PhotonClass::new(mu, d, j).ln_mass())
}

/// N_{μ,j} from the photon-number series.
pub fn normalization(mu: f64, d: u32, j: u32) -> Result<f64> {
    ln_normalization(mu, d, j).map(f64::exp)
}

/// N_{μ,j} as the double overlap sum Σ_{q,q'} ω^{j(q'-q)} ⟨√μω^{q'}|√μω^q⟩.
///
/// Suffers cancellation for small μ (O(1) terms summing to O(μ^j)); only
/// meant as a cross-check of [`normalization`].
pub fn normalization_overlap_sum(mu: f64, d: u32, j: u32) -> Result<f64> {
    validate_class(mu, d, j)?;
    let labels: Vec<Amplitude> = (0..d)
        .map(|q| root_of_unity(d, q as f64) * mu.sqrt())
        .collect();
    let mut acc = Amplitude::new(0.0, 0.0);
    for q in 0..d {
        for qp in 0..d {
            let phase = root_of_unity(d, j as f64 * (qp as f64 - q as f64));
            acc += phase * crate::algebra::coherent_overlap(labels[qp as usize], labels[q as usize]);
        }
    }
    Ok(acc.re)
}

/// |j_d⟩ as d coherent terms with coefficients ω^{-jq}/√N_{μ,j}.
pub fn pseudo_number_state(p: &PspParams) -> Result<CoherentSuperposition> {
    p.validate()?;
    let scale = (-0.5 * ln_normalization(p.mu, p.d, p.j)?).exp();
    let terms = (0..p.d)
        .map(|q| {
            let coeff = root_of_unity(p.d, -(p.j as f64) * q as f64) * scale;
            CoherentTerm::new(coeff, vec![p.label(q)])
        })
        .collect();
    CoherentSuperposition::new(1, terms)
}

/// F(|j⟩, |j_d⟩) = |⟨j|j_d⟩|² = d² e^{-μ} μ^j / j! / N_{μ,j}.
pub fn fidelity_to_number_state(p: &PspParams) -> Result<f64> {
    p.validate()?;
    let class = PhotonClass::new(p.mu, p.d, p.j);
    Ok((ln_poisson(p.mu, p.j as u64) - class.ln_mass()).exp())
}

/// Number of phases on the circle, including the continuous-phase limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseCount {
    Finite(u32),
    /// d → ∞: the class n ≡ j (mod d) collapses to {j}.
    Infinite,
}

/// F_PSP = F(|1⟩, |1_d⟩), with an exact branch for d → ∞.
pub fn single_photon_fidelity(mu: f64, phases: PhaseCount) -> Result<f64> {
    match phases {
        PhaseCount::Finite(d) => fidelity_to_number_state(&PspParams::new(mu, d, 1 % d.max(1))?),
        PhaseCount::Infinite => {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::Degenerate(format!(
                    "|1> limit needs mu > 0, got {mu}"
                )));
            }
            Ok(1.0)
        }
    }
}

/// P_{μ,j} = N_{μ,j}/d² = e^{-μ} Σ_{n≡j} μⁿ/n!; zero for j > 0 at μ = 0.
pub fn generation_probability(mu: f64, d: u32, j: u32) -> Result<f64> {
    validate_class(mu, d, j)?;
    Ok(class_mass(mu, d, j))
}

/// |√μ ω^q⟩ rebuilt from pseudo-number states:
/// (1/√d) Σ_j ω^{qj} √(N_{μ,j}/d) |j_d⟩, expanded into d² coherent terms.
pub fn coherent_from_pseudo(mu: f64, d: u32, q: u32) -> Result<CoherentSuperposition> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid(format!("mean photon number {mu} must be > 0")));
    }
    if d == 0 || q >= d {
        return Err(Error::invalid(format!("need 0 <= q < d, got q = {q}, d = {d}")));
    }
    let mut out: Option<CoherentSuperposition> = None;
    for j in 0..d {
        let ln_n = ln_normalization(mu, d, j)?;
        if ln_n == f64::NEG_INFINITY {
            // class carries no weight (underflow at tiny mu)
            continue;
        }
        let weight = root_of_unity(d, q as f64 * j as f64)
            * ((0.5 * (ln_n - (d as f64).ln())).exp() / (d as f64).sqrt());
        let component = pseudo_number_state(&PspParams::new(mu, d, j)?)?.scaled(weight);
        out = Some(match out {
            None => component,
            Some(acc) => acc.plus(&component)?,
        });
    }
    out.ok_or_else(|| Error::Degenerate("no pseudo-number component survived".into()))
}

/// A pseudo-number state after photon loss with transmission η.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossResult {
    pub eta: f64,
    /// μη, the mean photon number of the attenuated labels.
    pub attenuated_mu: f64,
    /// Σ_{q,q'} ω^{j(q'-q)} e^{(ω^{q-q'}-1)μ(1-η)} / N_{μ,j} |√(μη)ω^q⟩⟨√(μη)ω^{q'}|.
    pub exact: CoherentDyadOperator,
    /// (w₁, w₀) = (1 - μ(1-η), μ(1-η)) of the two-term small-loss form; j = 1 only.
    pub approx_weights: Option<(f64, f64)>,
    /// Exact populations of the attenuated pseudo-number states |k'_d⟩ (μ' = μη),
    /// k = 0..d-1. The evolved state is diagonal in that basis.
    pub class_weights: Vec<f64>,
    params: PspParams,
}

impl LossResult {
    /// w₁ |1'_d⟩⟨1'_d| + w₀ |0'_d⟩⟨0'_d| with the two-term small-loss weights.
    pub fn approximation(&self) -> Result<Option<CoherentDyadOperator>> {
        self.two_term_mixture(self.approx_weights)
    }

    /// Uhlmann fidelity (root convention) between the exact evolved state and
    /// the two-term small-loss form, evaluated on the number basis.
    pub fn approximation_fidelity(&self) -> Result<Option<f64>> {
        let Some(approx) = self.approximation()? else {
            return Ok(None);
        };
        let exact = self.exact.to_fock(Cutoff::Auto)?;
        let approx = approx.to_fock(Cutoff::Fixed(exact.cutoff()))?;
        exact.uhlmann_fidelity(&approx).map(Some)
    }

    /// The diagonal decomposition Σ_k w_k |k'_d⟩⟨k'_d| rebuilt from
    /// [`LossResult::class_weights`].
    pub fn class_mixture(&self) -> Result<CoherentDyadOperator> {
        let p = self.params;
        let states: Vec<(f64, CoherentSuperposition)> = self
            .class_weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, &w)| {
                let attenuated = PspParams {
                    mu: self.attenuated_mu,
                    d: p.d,
                    j: k as u32,
                    delta: p.delta,
                };
                pseudo_number_state(&attenuated).map(|s| (w, s))
            })
            .collect::<Result<_>>()?;
        let refs: Vec<(f64, &CoherentSuperposition)> = states.iter().map(|(w, s)| (*w, s)).collect();
        CoherentDyadOperator::mixture(&refs)
    }

    fn two_term_mixture(&self, weights: Option<(f64, f64)>) -> Result<Option<CoherentDyadOperator>> {
        let Some((w1, w0)) = weights else {
            return Ok(None);
        };
        let p = self.params;
        let one = pseudo_number_state(&PspParams {
            mu: self.attenuated_mu,
            d: p.d,
            j: 1 % p.d,
            delta: p.delta,
        })?;
        let zero = pseudo_number_state(&PspParams {
            mu: self.attenuated_mu,
            d: p.d,
            j: 0,
            delta: p.delta,
        })?;
        CoherentDyadOperator::mixture(&[(w1, &one), (w0, &zero)]).map(Some)
    }
}

/// Evolves |j_d⟩ under photon loss with transmission η = e^{-γt}.
pub fn loss_channel(p: &PspParams, eta: f64) -> Result<LossResult> {
    p.validate()?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("transmission {eta} outside (0, 1]")));
    }
    let d = p.d;
    let lost = p.mu * (1.0 - eta);
    let inv_norm = (-ln_normalization(p.mu, d, p.j)?).exp();
    let labels: Vec<Amplitude> = (0..d)
        .map(|q| root_of_unity(d, q as f64 + p.delta) * (p.mu * eta).sqrt())
        .collect();
    let mut dyads = Vec::with_capacity((d * d) as usize);
    for q in 0..d {
        for qp in 0..d {
            let diff = q as f64 - qp as f64;
            let phase = root_of_unity(d, -(p.j as f64) * diff);
            let damping = ((root_of_unity(d, diff) - 1.0) * lost).exp();
            dyads.push(Dyad {
                coeff: phase * damping * inv_norm,
                ket: vec![labels[q as usize]],
                bra: vec![labels[qp as usize]],
            });
        }
    }
    let exact = CoherentDyadOperator::new(1, dyads)?;

    // ρ = Σ_m e^{-x} x^m/m! (N'_{j-m}/N_j) |(j-m)'⟩⟨(j-m)'|, x = μ(1-η)
    let ln_mass = PhotonClass::new(p.mu, d, p.j).ln_mass();
    let class_weights = (0..d)
        .map(|k| {
            let ln_attenuated = PhotonClass::new(p.mu * eta, d, k).ln_mass();
            let shift = (p.j + d - k) % d;
            (ln_attenuated - ln_mass).exp() * class_mass(lost, d, shift)
        })
        .collect();

    let approx_weights = (p.j == 1 && d > 1).then(|| (1.0 - lost, lost));
    Ok(LossResult {
        eta,
        attenuated_mu: p.mu * eta,
        exact,
        approx_weights,
        class_weights,
        params: *p,
    })
}
