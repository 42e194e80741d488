//! Asymptotic secret key rates (bits per pulse).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::channel::{channel_stats, wcs_multiphoton_probability, ChannelParams, Source};
use super::encoding::{basis_fidelity_bound, basis_fidelity_exact, PhaseSet};
use crate::error::{Error, Result};
use crate::generation::{nontrigger_probability, trigger_probability, GenerationParams, TriggerConvention};
use crate::special::{binary_entropy, class_mass, PhotonClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProtocolKind {
    WcsNondecoy,
    WcsDecoy,
    PspNondecoy,
    PspPassiveDecoy,
    PspTriggered,
}

impl ProtocolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::WcsNondecoy => "WCS_NONDECOY",
            ProtocolKind::WcsDecoy => "WCS_DECOY",
            ProtocolKind::PspNondecoy => "PSP_NONDECOY",
            ProtocolKind::PspPassiveDecoy => "PSP_PASSIVE_DECOY",
            ProtocolKind::PspTriggered => "PSP_TRIGGERED",
        }
    }
}

/// A protocol together with its source parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Protocol {
    WcsNondecoy,
    WcsDecoy,
    PspNondecoy { d: u32 },
    PspPassiveDecoy { d: u32 },
    PspTriggered { d: u32, nu: f64, eta_trigger: f64 },
}

impl Protocol {
    pub fn kind(&self) -> ProtocolKind {
        match self {
            Protocol::WcsNondecoy => ProtocolKind::WcsNondecoy,
            Protocol::WcsDecoy => ProtocolKind::WcsDecoy,
            Protocol::PspNondecoy { .. } => ProtocolKind::PspNondecoy,
            Protocol::PspPassiveDecoy { .. } => ProtocolKind::PspPassiveDecoy,
            Protocol::PspTriggered { .. } => ProtocolKind::PspTriggered,
        }
    }

    pub fn d(&self) -> Option<u32> {
        match *self {
            Protocol::PspNondecoy { d } | Protocol::PspPassiveDecoy { d } | Protocol::PspTriggered { d, .. } => Some(d),
            _ => None,
        }
    }

    /// Triggered protocol with meter ν = 2d² (so √ν > d).
    pub fn triggered(d: u32, eta_trigger: f64) -> Self {
        Protocol::PspTriggered {
            d,
            nu: 2.0 * (d as f64) * (d as f64),
            eta_trigger,
        }
    }
}

/// Yield assigned to a pseudo-number state |j_d⟩.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum YieldModel {
    /// Σ_{n≡j} p(n|j) Y_n over the photon numbers of the class.
    #[default]
    ClassAverage,
    /// Y_j of the lowest photon number in the class.
    DominantNumber,
}

/// Mean photon number fed to the basis-fidelity bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FidelityConvention {
    /// μ per pulse, 2μ in the encoded pulse pair.
    #[default]
    PerPulse,
    /// μ is the total of the pair, μ/2 per pulse.
    Total,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateOptions {
    pub yield_model: YieldModel,
    pub fidelity: FidelityConvention,
    pub trigger: TriggerConvention,
    pub phase_set: PhaseSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateResult {
    pub protocol: ProtocolKind,
    pub mu: f64,
    pub d: Option<u32>,
    pub nu: Option<f64>,
    pub distance_km: f64,
    pub gain: f64,
    pub qber: f64,
    pub rate: f64,
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl KeyRateResult {
    fn new(protocol: ProtocolKind, mu: f64, c: &ChannelParams) -> Self {
        KeyRateResult {
            protocol,
            mu,
            d: None,
            nu: None,
            distance_km: c.distance_km,
            gain: 0.0,
            qber: 0.0,
            rate: 0.0,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn diag(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.to_string(), value);
    }
}

/// Upper bound on the phase error from the bit error and basis dependence Δ:
/// e_b + 4Δ(1-Δ)(1-2e_b) + 4(1-2Δ)√(Δ(1-Δ)e_b(1-e_b)).
pub fn phase_error_bound(e_b: f64, delta: f64) -> f64 {
    e_b + 4.0 * delta * (1.0 - delta) * (1.0 - 2.0 * e_b)
        + 4.0 * (1.0 - 2.0 * delta) * (delta * (1.0 - delta) * e_b * (1.0 - e_b)).sqrt()
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid(format!("mean photon number {mu} must be > 0")));
    }
    Ok(())
}

fn check_encodable(d: u32) -> Result<()> {
    if d == 0 || d % 4 != 0 {
        return Err(Error::invalid(format!("phase encoding needs d divisible by 4, got {d}")));
    }
    Ok(())
}

/// Yield of |j_d⟩ under the chosen model.
pub fn pseudo_state_yield(c: &ChannelParams, mu: f64, d: u32, j: u32, model: YieldModel) -> f64 {
    match model {
        YieldModel::ClassAverage => {
            let class = PhotonClass::new(mu, d, j);
            if class.terms.is_empty() {
                c.yield_n(j as u64)
            } else {
                class.conditional_mean(|n| c.yield_n(n))
            }
        }
        YieldModel::DominantNumber => c.yield_n(j as u64),
    }
}

/// Fidelity between the X- and Y-basis states of |1_d⟩ under `opts`.
pub fn basis_fidelity(mu: f64, d: u32, opts: &RateOptions) -> Result<f64> {
    let per_pulse = match opts.fidelity {
        FidelityConvention::PerPulse => mu,
        FidelityConvention::Total => mu / 2.0,
    };
    match opts.phase_set {
        PhaseSet::Standard => basis_fidelity_bound(per_pulse, d, 1),
        PhaseSet::PaperLiteral => basis_fidelity_exact(per_pulse, d, 1, PhaseSet::PaperLiteral),
    }
}

/// GLLP rate without decoys: -f Q H(E) + Q Ω [1 - H(E/Ω)], Ω = (Q - P_multi)/Q.
pub fn keyrate_nondecoy(c: &ChannelParams, mu: f64, source: Source) -> Result<KeyRateResult> {
    check_mu(mu)?;
    let stats = channel_stats(c, mu, source)?;
    let (kind, p_multi) = match source {
        Source::Wcs => (ProtocolKind::WcsNondecoy, wcs_multiphoton_probability(mu)),
        Source::Psp { d } => (
            ProtocolKind::PspNondecoy,
            (2..d).map(|j| class_mass(mu, d, j)).sum::<f64>(),
        ),
    };
    let mut out = KeyRateResult::new(kind, mu, c);
    if let Source::Psp { d } = source {
        out.d = Some(d);
    }
    out.gain = stats.gain;
    out.qber = stats.qber;
    let omega = (stats.gain - p_multi) / stats.gain;
    out.diag("eta", stats.eta);
    out.diag("p_multi", p_multi);
    out.diag("omega", omega);
    if omega <= 0.0 {
        out.notes.push("multiphoton probability exceeds the gain".into());
        return Ok(out);
    }
    let e_single = stats.qber / omega;
    out.diag("e_single_max", e_single);
    if e_single >= 0.5 {
        out.notes.push("single-photon error bound reaches 1/2".into());
        return Ok(out);
    }
    let rate = -c.f * stats.gain * binary_entropy(stats.qber)
        + stats.gain * omega * (1.0 - binary_entropy(e_single));
    out.rate = rate.max(0.0);
    Ok(out)
}

/// Weak coherent pulses with infinitely many decoys:
/// -f Q H(E) + Q₁[1 - H(e₁)], Q₁ = Y₁ μ e^{-μ}.
pub fn keyrate_wcs_decoy(c: &ChannelParams, mu: f64) -> Result<KeyRateResult> {
    check_mu(mu)?;
    let stats = channel_stats(c, mu, Source::Wcs)?;
    let y1 = c.yield_n(1);
    let e1 = c.error_n(1);
    let q1 = y1 * mu * (-mu).exp();
    let mut out = KeyRateResult::new(ProtocolKind::WcsDecoy, mu, c);
    out.gain = stats.gain;
    out.qber = stats.qber;
    out.diag("eta", stats.eta);
    out.diag("y1", y1);
    out.diag("q1", q1);
    out.diag("e1", e1);
    let rate = -c.f * stats.gain * binary_entropy(stats.qber) + q1 * (1.0 - binary_entropy(e1));
    out.rate = rate.max(0.0);
    Ok(out)
}

/// Phase-error bound from (e_b, F, Y); `None` when Δ > 1/2 makes it vacuous.
fn phase_error(out: &mut KeyRateResult, e_b: f64, fidelity: f64, y1: f64) -> Option<f64> {
    let delta = (1.0 - fidelity) / (2.0 * y1);
    out.diag("fidelity", fidelity);
    out.diag("delta", delta);
    if !(delta <= 0.5) {
        out.notes.push("basis dependence exceeds 1/2; bound is vacuous".into());
        return None;
    }
    let delta = delta.max(0.0);
    let e_p = phase_error_bound(e_b.min(0.5), delta).min(0.5);
    out.diag("e_p1", e_p);
    Some(e_p)
}

/// Passive decoy with full heralding of |j_d⟩:
/// P₁Y₁[1 - f H(e_b) - H(e_p)].
pub fn keyrate_psp_passive(c: &ChannelParams, mu: f64, d: u32, opts: &RateOptions) -> Result<KeyRateResult> {
    check_mu(mu)?;
    check_encodable(d)?;
    let stats = channel_stats(c, mu, Source::Psp { d })?;
    let mut out = KeyRateResult::new(ProtocolKind::PspPassiveDecoy, mu, c);
    out.d = Some(d);
    out.gain = stats.gain;
    out.qber = stats.qber;
    let p1 = class_mass(mu, d, 1);
    let y1 = pseudo_state_yield(c, mu, d, 1, opts.yield_model);
    let e_b = c.error_for_yield(y1);
    out.diag("eta", stats.eta);
    out.diag("p1", p1);
    out.diag("y1", y1);
    out.diag("e_b1", e_b);
    let fidelity = basis_fidelity(mu, d, opts)?;
    let Some(e_p) = phase_error(&mut out, e_b, fidelity, y1) else {
        return Ok(out);
    };
    let rate = p1 * y1 * (1.0 - c.f * binary_entropy(e_b) - binary_entropy(e_p));
    out.rate = rate.max(0.0);
    Ok(out)
}

/// |1_d⟩ picked out by an on-off trigger on the meter:
/// -f Q⁽ᵗ⁾ H(E⁽ᵗ⁾) + Q₁ᴸ [1 - H(e_p,max)], with Q₁ᴸ = (r - r_{ν,0}) Q⁽ⁿᵗ⁾.
pub fn keyrate_psp_triggered(
    c: &ChannelParams,
    mu: f64,
    d: u32,
    nu: f64,
    eta_trigger: f64,
    opts: &RateOptions,
) -> Result<KeyRateResult> {
    check_mu(mu)?;
    check_encodable(d)?;
    let g = GenerationParams::new(mu, nu, d, eta_trigger)?;
    let stats = channel_stats(c, mu, Source::Psp { d })?;
    let mut out = KeyRateResult::new(ProtocolKind::PspTriggered, mu, c);
    out.d = Some(d);
    out.nu = Some(nu);

    let (mut q_t, mut q_nt, mut eq_t) = (0.0, 0.0, 0.0);
    for j in 0..d {
        let p = class_mass(mu, d, j);
        if p == 0.0 {
            continue;
        }
        let y = pseudo_state_yield(c, mu, d, j, opts.yield_model);
        let e = c.error_for_yield(y);
        let t = trigger_probability(&g, j, opts.trigger)?;
        let nt = nontrigger_probability(&g, j, opts.trigger)?;
        q_t += p * t * y;
        q_nt += p * nt * y;
        eq_t += p * t * y * e;
    }
    let e_t = eq_t / q_t;
    out.gain = q_t;
    out.qber = e_t;
    out.diag("eta", stats.eta);
    out.diag("gain_nontriggered", q_nt);
    if g.discrimination_warning() {
        out.notes.push(format!("sqrt(nu) = {:.3} <= d: meter phases poorly separated", nu.sqrt()));
    }

    let r0 = trigger_probability(&g, 0, opts.trigger)? / nontrigger_probability(&g, 0, opts.trigger)?;
    let r = q_t / q_nt;
    let q1_bound = q_t - r0 * q_nt;
    let p1 = class_mass(mu, d, 1);
    let y1 = pseudo_state_yield(c, mu, d, 1, opts.yield_model);
    out.diag("r", r);
    out.diag("r_nu_0", r0);
    out.diag("q1_bound", q1_bound);
    out.diag("q1_exact", p1 * y1);
    out.diag("e_b1_channel", c.error_for_yield(y1));
    if !(q1_bound > 0.0) {
        out.notes.push("single-photon gain bound is not positive".into());
        return Ok(out);
    }
    let e_b_max = eq_t / q1_bound;
    out.diag("e_b1_max", e_b_max);
    let y1_bound = q1_bound / p1;
    out.diag("y1_bound", y1_bound);
    let fidelity = basis_fidelity(mu, d, opts)?;
    let Some(e_p) = phase_error(&mut out, e_b_max, fidelity, y1_bound) else {
        return Ok(out);
    };
    let rate = -c.f * q_t * binary_entropy(e_t) + q1_bound * (1.0 - binary_entropy(e_p));
    out.rate = rate.max(0.0);
    Ok(out)
}

/// Rate of `protocol` at (c, μ).
pub fn keyrate(c: &ChannelParams, mu: f64, protocol: &Protocol, opts: &RateOptions) -> Result<KeyRateResult> {
    match *protocol {
        Protocol::WcsNondecoy => keyrate_nondecoy(c, mu, Source::Wcs),
        Protocol::WcsDecoy => keyrate_wcs_decoy(c, mu),
        Protocol::PspNondecoy { d } => keyrate_nondecoy(c, mu, Source::Psp { d }),
        Protocol::PspPassiveDecoy { d } => keyrate_psp_passive(c, mu, d, opts),
        Protocol::PspTriggered { d, nu, eta_trigger } => {
            keyrate_psp_triggered(c, mu, d, nu, eta_trigger, opts)
        }
    }
}

/// Grid search for the rate-maximizing μ; ties go to the smaller μ.
pub fn optimize_mu(
    c: &ChannelParams,
    protocol: &Protocol,
    grid: &[f64],
    opts: &RateOptions,
) -> Result<(f64, KeyRateResult)> {
    let mut best: Option<KeyRateResult> = None;
    for &mu in grid {
        let r = keyrate(c, mu, protocol, opts)?;
        let better = match &best {
            None => true,
            Some(b) => r.rate > b.rate || (r.rate == b.rate && mu < b.mu),
        };
        if better {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| Error::invalid("empty mean-photon-number grid"))?;
    Ok((best.mu, best))
}
