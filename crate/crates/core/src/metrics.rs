//! Single-photon figures of merit: g²(0) and two-photon interference.

use serde::{Deserialize, Serialize};

use crate::algebra::{
    beam_splitter, fock_amplitude, fock_beam_splitter, projector_expectation, to_fock, Amplitude,
    BeamSplitter, CoherentSuperposition, Cutoff, FockVector,
};
use crate::error::{clamp_within, Error, Result};
use crate::psp::{pseudo_number_state, root_of_unity, PspParams};
use crate::special::PhotonClass;

/// Smallest band outside [0, 1] that is attributed to rounding before clamping.
pub const PROBABILITY_RESIDUE_TOLERANCE: f64 = 1e-12;

/// Rounding band for a probability summed over the coherent expansion of
/// `state`: every term of such a sum is bounded by |c_t||c_t'|, so the error
/// is at most a few ulps of (Σ_t |c_t|)². Small μ makes the coefficients
/// large and the band wide.
pub fn probability_tolerance(state: &CoherentSuperposition) -> f64 {
    let l1: f64 = state.terms().iter().map(|t| t.coeff.norm()).sum();
    PROBABILITY_RESIDUE_TOLERANCE.max(16.0 * f64::EPSILON * l1 * l1)
}

/// A g²(0) value together with the imaginary part left in its overlap-sum
/// evaluation (relative to the d² unit-size terms of that sum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2 {
    pub value: f64,
    pub residue: f64,
}

/// d Σ_k ω^{-jk} e^{(ω^k - 1)μ}, i.e. Σ_{q,q'} ω^{j(q'-q)} ⟨√μω^{q'}|√μω^q⟩ with the
/// double sum folded over k = q - q'. Real up to rounding; equals N_{μ,j}.
pub fn overlap_class_sum(mu: f64, d: u32, j: u32) -> Amplitude {
    (0..d)
        .map(|k| {
            let w = root_of_unity(d, k as f64);
            root_of_unity(d, -(j as f64) * k as f64) * ((w - 1.0) * mu).exp()
        })
        .sum::<Amplitude>()
        * d as f64
}

fn check_g2_args(mu: f64, d: u32) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid(format!("g2 needs mu > 0, got {mu}")));
    }
    if d == 0 {
        return Err(Error::invalid("number of phases d must be >= 1"));
    }
    Ok(())
}

/// g²(0) of |1_d⟩: N_{μ,1} N_{μ,d-1} / N_{μ,0}².
///
/// The value comes from the photon-number class series; `residue` is taken
/// from the equivalent overlap form
/// N_{μ,1} Σ_{q,q'} ω^{q-q'} e^{(ω^{q-q'}-1)μ} / (Σ_{q,q'} e^{(ω^{q-q'}-1)μ})².
pub fn g2_zero_closed(mu: f64, d: u32) -> Result<G2> {
    check_g2_args(mu, d)?;
    let ln_mass = |j: u32| PhotonClass::new(mu, d, j).ln_mass();
    let value = (ln_mass(1 % d) + ln_mass((d - 1) % d) - 2.0 * ln_mass(0)).exp();
    let numerator = overlap_class_sum(mu, d, (d - 1) % d);
    Ok(G2 {
        value,
        residue: numerator.im.abs() / (d as f64 * d as f64),
    })
}

/// The overlap form with phase factor ω^{q'-q} in the numerator instead of
/// ω^{q-q'}. This evaluates to N_{μ,1}²/N_{μ,0}², which is not ⟨n(n-1)⟩/⟨n⟩²
/// for d > 2; kept only for comparison against [`g2_zero_closed`].
pub fn g2_zero_as_printed(mu: f64, d: u32) -> Result<G2> {
    check_g2_args(mu, d)?;
    let ln_mass = |j: u32| PhotonClass::new(mu, d, j).ln_mass();
    let value = (2.0 * ln_mass(1 % d) - 2.0 * ln_mass(0)).exp();
    let numerator = overlap_class_sum(mu, d, 1 % d);
    Ok(G2 {
        value,
        residue: numerator.im.abs() / (d as f64 * d as f64),
    })
}

/// g²(0) of a general |j_d⟩: N_{μ,j} N_{μ,j-2} / N_{μ,j-1}² (indices mod d).
pub fn g2_zero_class(p: &PspParams) -> Result<f64> {
    p.validate()?;
    check_g2_args(p.mu, p.d)?;
    let d = p.d;
    let ln_mass = |j: u32| PhotonClass::new(p.mu, d, j).ln_mass();
    Ok((ln_mass(p.j) + ln_mass((p.j + 2 * d - 2) % d) - 2.0 * ln_mass((p.j + d - 1) % d)).exp())
}

/// ⟨n(n-1)⟩/⟨n⟩² from truncated number-basis amplitudes.
pub fn g2_zero_oracle(state: &FockVector) -> Result<f64> {
    let norm = state.norm_sqr();
    let mean = state.photon_expectation(|n| n as f64)? / norm;
    if mean <= 0.0 {
        return Err(Error::invalid("g2 undefined for zero mean photon number"));
    }
    let second = state.photon_expectation(|n| (n * n.saturating_sub(1)) as f64)? / norm;
    Ok(second / (mean * mean))
}

/// Two-photon interference of two pseudo-number states on a 50:50 splitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomResult {
    /// Probability of photons in both output modes.
    pub p11: f64,
    /// |⟨out|(|2,0⟩ - |0,2⟩)/√2|².
    pub f2002: f64,
    pub out_state: CoherentSuperposition,
}

/// Sends |j_d⟩ ⊗ |j'_{d'}⟩ through the X splitter.
pub fn hom(p1: &PspParams, p2: &PspParams) -> Result<HomResult> {
    let input = pseudo_number_state(p1)?.tensor(&pseudo_number_state(p2)?);
    let out_state = beam_splitter(&input, 0, 1, BeamSplitter::X)?;

    let vacuum = CoherentSuperposition::vacuum(1);
    let vac_a = projector_expectation(&out_state, &[Some(&vacuum), None])?.re;
    let vac_b = projector_expectation(&out_state, &[None, Some(&vacuum)])?.re;
    let vac_ab = projector_expectation(&out_state, &[Some(&vacuum), Some(&vacuum)])?.re;
    let p11 = (1.0 - vac_b) - (vac_a - vac_ab);

    let amp: Amplitude = out_state
        .terms()
        .iter()
        .map(|t| {
            let (a, b) = (t.labels[0], t.labels[1]);
            t.coeff
                * (fock_amplitude(a, 2) * fock_amplitude(b, 0)
                    - fock_amplitude(a, 0) * fock_amplitude(b, 2))
        })
        .sum::<Amplitude>()
        * std::f64::consts::FRAC_1_SQRT_2;

    let tol = probability_tolerance(&out_state);
    Ok(HomResult {
        p11: clamp_within("P11", p11, 0.0, 1.0, tol)?,
        f2002: clamp_within("F2002", amp.norm_sqr(), 0.0, 1.0, tol)?,
        out_state,
    })
}

/// (P₁₁, F₂₀₀₂) computed in the truncated number basis, for cross-checks.
pub fn hom_fock(p1: &PspParams, p2: &PspParams, cutoff: usize) -> Result<(f64, f64)> {
    let a = to_fock(&pseudo_number_state(p1)?, Cutoff::Fixed(cutoff))?;
    let b = to_fock(&pseudo_number_state(p2)?, Cutoff::Fixed(cutoff))?;
    let out = fock_beam_splitter(&a.tensor(&b)?, 0, 1, BeamSplitter::X)?;
    let mut p11 = 0.0;
    for n in 1..=cutoff {
        for m in 1..=cutoff {
            p11 += out.amplitude(&[n, m]).norm_sqr();
        }
    }
    let f = ((out.amplitude(&[2, 0]) - out.amplitude(&[0, 2])) * std::f64::consts::FRAC_1_SQRT_2)
        .norm_sqr();
    Ok((p11, f))
}
