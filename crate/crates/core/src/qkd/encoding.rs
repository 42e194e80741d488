//! Phase encoding of |j_d⟩ into a reference/signal pulse pair and the
//! BB84 receiver.

use serde::{Deserialize, Serialize};

use crate::algebra::{
    beam_splitter, inner_product, projector_expectation, Amplitude, BeamSplitter,
    CoherentSuperposition, CoherentTerm,
};
use crate::error::{clamp_within, Error, Result};
use crate::metrics::probability_tolerance;
use crate::psp::{ln_normalization, root_of_unity};

/// Slack above 1 tolerated in the basis-fidelity bound before clamping.
pub const FIDELITY_BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
}

impl Basis {
    pub fn splitter(self) -> BeamSplitter {
        match self {
            Basis::X => BeamSplitter::X,
            Basis::Y => BeamSplitter::Y,
        }
    }
}

/// The four encoded states: bit value `bit` in basis `basis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub basis: Basis,
    pub bit: u8,
}

impl BasisState {
    pub const ALL: [BasisState; 4] = [
        BasisState { basis: Basis::X, bit: 0 },
        BasisState { basis: Basis::X, bit: 1 },
        BasisState { basis: Basis::Y, bit: 0 },
        BasisState { basis: Basis::Y, bit: 1 },
    ];
}

/// Which relative phases φ = 2πk/d encode the four BB84 states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PhaseSet {
    /// φ ∈ {0, π} for X and {π/2, 3π/2} for Y.
    #[default]
    Standard,
    /// φ ∈ {0, π} for X and {π/2, 3π/4} for Y.
    PaperLiteral,
}

impl PhaseSet {
    /// Phase index k = φd/2π of a basis state.
    pub fn phase_index(self, d: u32, state: BasisState) -> Result<u32> {
        check_divisible(d)?;
        let k = match (state.basis, state.bit, self) {
            (Basis::X, 0, _) => 0,
            (Basis::X, _, _) => d / 2,
            (Basis::Y, 0, _) => d / 4,
            (Basis::Y, _, PhaseSet::Standard) => 3 * d / 4,
            (Basis::Y, _, PhaseSet::PaperLiteral) => {
                if d % 8 != 0 {
                    return Err(Error::invalid(format!(
                        "phase 3π/4 needs k = 3d/8, not an integer for d = {d}"
                    )));
                }
                3 * d / 8
            }
        };
        Ok(k)
    }
}

fn check_divisible(d: u32) -> Result<()> {
    if d == 0 || d % 4 != 0 {
        return Err(Error::invalid(format!("phase encoding needs d divisible by 4, got {d}")));
    }
    Ok(())
}

fn check_mu(mu: f64, j: u32) -> Result<()> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::invalid(format!("mean photon number {mu} must be finite and >= 0")));
    }
    if j != 0 && mu == 0.0 {
        return Err(Error::Degenerate(format!("j = {j} needs mu > 0")));
    }
    Ok(())
}

/// N_{2μ,j}^{-1/2} Σ_q ω^{-jq} |√μ ω^q⟩_r |√μ ω^{q+k}⟩_s, μ per pulse.
pub fn encoded_state(mu: f64, d: u32, j: u32, k: u32) -> Result<CoherentSuperposition> {
    check_divisible(d)?;
    check_mu(mu, j)?;
    if j >= d || k >= d {
        return Err(Error::invalid(format!("need j, k < d = {d}, got j = {j}, k = {k}")));
    }
    let scale = (-0.5 * ln_normalization(2.0 * mu, d, j)?).exp();
    let terms = (0..d)
        .map(|q| {
            let coeff = root_of_unity(d, -(j as f64) * q as f64) * scale;
            let r = root_of_unity(d, q as f64) * mu.sqrt();
            let s = root_of_unity(d, (q + k) as f64) * mu.sqrt();
            CoherentTerm::new(coeff, vec![r, s])
        })
        .collect();
    CoherentSuperposition::new(2, terms)
}

/// Encoded state for a named basis state under a phase set.
pub fn encode(mu: f64, d: u32, j: u32, state: BasisState, set: PhaseSet) -> Result<CoherentSuperposition> {
    encoded_state(mu, d, j, set.phase_index(d, state)?)
}

/// Exclusive on-off detector outcomes behind the receiver's beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickProbabilities {
    /// Only the port-0 detector clicks.
    pub port0: f64,
    /// Only the port-1 detector clicks.
    pub port1: f64,
    pub double: f64,
    pub none: f64,
}

impl ClickProbabilities {
    pub fn total(&self) -> f64 {
        self.port0 + self.port1 + self.double + self.none
    }
}

/// Interferes the two pulses on the beam splitter of `basis` and reads out
/// both ports with on-off detectors.
pub fn measure_bb84(state: &CoherentSuperposition, basis: Basis) -> Result<ClickProbabilities> {
    if state.mode_count() != 2 {
        return Err(Error::ModeMismatch {
            expected: 2,
            found: state.mode_count(),
        });
    }
    let out = beam_splitter(state, 0, 1, basis.splitter())?;
    let norm = out.norm_sqr();
    let vacuum = CoherentSuperposition::vacuum(1);
    let vac_0 = projector_expectation(&out, &[Some(&vacuum), None])?.re / norm;
    let vac_1 = projector_expectation(&out, &[None, Some(&vacuum)])?.re / norm;
    let none = projector_expectation(&out, &[Some(&vacuum), Some(&vacuum)])?.re / norm;
    let tol = probability_tolerance(&out) / norm;
    Ok(ClickProbabilities {
        port0: clamp_within("port-0 click probability", vac_1 - none, 0.0, 1.0, tol)?,
        port1: clamp_within("port-1 click probability", vac_0 - none, 0.0, 1.0, tol)?,
        double: clamp_within("double click probability", (1.0 - vac_0) - (vac_1 - none), 0.0, 1.0, tol)?,
        none: clamp_within("no-click probability", none, 0.0, 1.0, tol)?,
    })
}

/// Lower bound on the fidelity between the X- and Y-basis density operators
/// of |j_d⟩ (μ per pulse):
/// d |Σ_q ω^{jq} e^{-2μ+μω^{-q}} (e^{iμω^{-q}} + i e^{-iμω^{-q}})| / (√2 N_{2μ,j}).
///
/// For j ∈ {0, 1} this equals [`basis_fidelity_exact`] with the standard
/// phase set. For other j it is neither tight nor guaranteed to stay below
/// the exact value.
pub fn basis_fidelity_bound(mu: f64, d: u32, j: u32) -> Result<f64> {
    check_divisible(d)?;
    check_mu(mu, j)?;
    if j >= d {
        return Err(Error::invalid(format!("index j = {j} must lie in [0, {}]", d - 1)));
    }
    let i = Amplitude::new(0.0, 1.0);
    let sum: Amplitude = (0..d)
        .map(|q| {
            let w = root_of_unity(d, -(q as f64)) * mu;
            root_of_unity(d, (j * q) as f64)
                * (w - 2.0 * mu).exp()
                * ((i * w).exp() + i * (-i * w).exp())
        })
        .sum();
    let ln_value =
        (d as f64).ln() + sum.norm().ln() - 0.5 * 2f64.ln() - ln_normalization(2.0 * mu, d, j)?;
    clamp_within("basis fidelity bound", ln_value.exp(), 0.0, 1.0, FIDELITY_BOUND_SLACK)
}

/// Fidelity (root convention) between ρ_X = (|Φ_X0⟩⟨Φ_X0| + |Φ_X1⟩⟨Φ_X1|)/2 and
/// ρ_Y likewise, from the 2×2 matrix M = A†B of the factors ρ_X = AA†, ρ_Y = BB†:
/// ‖M‖₁ = √(‖M‖_F² + 2|det M|).
pub fn basis_fidelity_exact(mu: f64, d: u32, j: u32, set: PhaseSet) -> Result<f64> {
    let states: Vec<CoherentSuperposition> = BasisState::ALL
        .iter()
        .map(|&s| encode(mu, d, j, s, set))
        .collect::<Result<_>>()?;
    let mut m = [[Amplitude::new(0.0, 0.0); 2]; 2];
    for (r, x) in states[..2].iter().enumerate() {
        for (c, y) in states[2..].iter().enumerate() {
            m[r][c] = inner_product(x, y)? * 0.5;
        }
    }
    let frob: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm();
    clamp_within("basis fidelity", (frob + 2.0 * det).sqrt(), 0.0, 1.0, FIDELITY_BOUND_SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psp::{pseudo_number_state, PspParams};

    #[test]
    fn encoded_states_normalized() {
        for k in [0, 2, 4, 6] {
            let s = encoded_state(0.2, 8, 1, k).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
        assert!(encoded_state(0.2, 6, 1, 0).is_err());
        assert!(encoded_state(0.2, 8, 1, 8).is_err());
    }

    #[test]
    fn x_basis_routes_to_one_port() {
        let (mu, d, j) = (0.2, 8, 1);
        let psp = pseudo_number_state(&PspParams::new(2.0 * mu, d, j).unwrap()).unwrap();
        let vac = CoherentSuperposition::vacuum(1);
        for (k, bright) in [(0u32, 0usize), (d / 2, 1)] {
            let out = beam_splitter(&encoded_state(mu, d, j, k).unwrap(), 0, 1, BeamSplitter::X).unwrap();
            let target = if bright == 0 { psp.tensor(&vac) } else { vac.tensor(&psp) };
            let f = inner_product(&target, &out).unwrap().norm_sqr();
            assert!((f - 1.0).abs() < 1e-10, "k={k}: {f}");
            let clicks = measure_bb84(&encoded_state(mu, d, j, k).unwrap(), Basis::X).unwrap();
            if bright == 0 {
                assert!(clicks.port1 < 1e-14 && clicks.double < 1e-14);
            } else {
                assert!(clicks.port0 < 1e-14 && clicks.double < 1e-14);
            }
            assert!((clicks.total() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn conjugate_basis_is_balanced() {
        let s = encode(0.2, 8, 1, BasisState { basis: Basis::X, bit: 0 }, PhaseSet::Standard).unwrap();
        let c = measure_bb84(&s, Basis::Y).unwrap();
        assert!((c.port0 - c.port1).abs() < 0.05);
        assert!((c.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phase_sets() {
        let y1 = BasisState { basis: Basis::Y, bit: 1 };
        assert_eq!(PhaseSet::Standard.phase_index(8, y1).unwrap(), 6);
        assert_eq!(PhaseSet::PaperLiteral.phase_index(8, y1).unwrap(), 3);
        assert!(PhaseSet::PaperLiteral.phase_index(4, y1).is_err());
        assert!(PhaseSet::Standard.phase_index(36, y1).is_ok());
    }

    #[test]
    fn bound_near_one_for_weak_pulses() {
        for j in [0, 1] {
            assert!(basis_fidelity_bound(1e-4, 8, j).unwrap() >= 0.999);
        }
        assert!(basis_fidelity_bound(0.3, 8, 1).unwrap() >= basis_fidelity_bound(0.3, 4, 1).unwrap());
        assert!((basis_fidelity_bound(0.0, 4, 0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bound_equals_exact_fidelity_for_standard_phases() {
        for &(mu, d) in &[(0.2, 4u32), (0.5, 8), (1.0, 8), (0.1, 12), (1.0, 36), (2.0, 4)] {
            for j in [0, 1] {
                let bound = basis_fidelity_bound(mu, d, j).unwrap();
                let exact = basis_fidelity_exact(mu, d, j, PhaseSet::Standard).unwrap();
                assert!((bound - exact).abs() < 1e-10, "mu={mu} d={d} j={j}: {bound} vs {exact}");
            }
        }
    }

    #[test]
    fn bound_is_not_general_beyond_low_classes() {
        // j = 3 falls far below the true value, j = 11 overshoots it
        let low = basis_fidelity_bound(0.1, 12, 3).unwrap();
        let over = basis_fidelity_bound(0.1, 12, 11).unwrap();
        assert!(low < basis_fidelity_exact(0.1, 12, 3, PhaseSet::Standard).unwrap() - 0.4);
        assert!(over > basis_fidelity_exact(0.1, 12, 11, PhaseSet::Standard).unwrap() + 1e-3);
    }
}
