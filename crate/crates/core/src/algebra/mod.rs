//! Exact algebra over finite superpositions of multimode coherent states.
//!
//! A state is a list of terms `c · |α₁⟩⊗…⊗|α_m⟩`. Every quantity used in
//! this crate reduces to sums of coherent overlaps, which are evaluated in
//! closed form. The truncated Fock representation in [`fock`] and the dense
//! operators in [`operator`] exist as independent oracles.

pub mod fock;
pub mod operator;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fock::{fock_beam_splitter, to_fock, to_fock_with_tolerance, Cutoff, FockVector};
pub use operator::{CoherentDyadOperator, Dyad, FockOperator};

/// Complex amplitude of a coherent-state label or expansion coefficient.
pub type Amplitude = Complex64;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Exponent of the coherent overlap ⟨a|b⟩ = exp(-|a|²/2 - |b|²/2 + a*b).
#[inline]
pub(crate) fn ln_overlap(a: Amplitude, b: Amplitude) -> Amplitude {
    Amplitude::new(-0.5 * (a.norm_sqr() + b.norm_sqr()), 0.0) + a.conj() * b
}

/// ⟨a|b⟩ for single-mode coherent states.
pub fn coherent_overlap(a: Amplitude, b: Amplitude) -> Amplitude {
    ln_overlap(a, b).exp()
}

/// Product of single-mode overlaps, accumulated as a single exponent.
pub fn multimode_overlap(a: &[Amplitude], b: &[Amplitude]) -> Amplitude {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| ln_overlap(x, y))
        .sum::<Amplitude>()
        .exp()
}

/// ⟨n|a⟩ = e^{-|a|²/2} aⁿ / √(n!).
pub fn fock_amplitude(a: Amplitude, n: u64) -> Amplitude {
    let r2 = a.norm_sqr();
    if r2 == 0.0 {
        return if n == 0 {
            Amplitude::new(1.0, 0.0)
        } else {
            Amplitude::new(0.0, 0.0)
        };
    }
    let ln_mag = -0.5 * r2 + 0.5 * n as f64 * r2.ln() - 0.5 * crate::special::ln_factorial(n);
    Amplitude::from_polar(ln_mag.exp(), n as f64 * a.arg())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentTerm {
    pub coeff: Amplitude,
    pub labels: Vec<Amplitude>,
}

impl CoherentTerm {
    pub fn new(coeff: Amplitude, labels: Vec<Amplitude>) -> Self {
        CoherentTerm { coeff, labels }
    }
}

/// Finite superposition of product coherent states over a fixed number of modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentSuperposition {
    modes: usize,
    terms: Vec<CoherentTerm>,
}

fn is_finite(z: Amplitude) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl CoherentSuperposition {
    pub fn new(modes: usize, terms: Vec<CoherentTerm>) -> Result<Self> {
        if modes == 0 {
            return Err(Error::invalid("a state needs at least one mode"));
        }
        for t in &terms {
            if t.labels.len() != modes {
                return Err(Error::ModeMismatch {
                    expected: modes,
                    found: t.labels.len(),
                });
            }
            if !is_finite(t.coeff) || !t.labels.iter().all(|&l| is_finite(l)) {
                return Err(Error::invalid("non-finite coefficient or label"));
            }
        }
        Ok(CoherentSuperposition { modes, terms })
    }

    /// The product coherent state |l₀⟩⊗…⊗|l_{m-1}⟩.
    pub fn coherent(labels: &[Amplitude]) -> Self {
        assert!(!labels.is_empty());
        CoherentSuperposition {
            modes: labels.len(),
            terms: vec![CoherentTerm::new(Amplitude::new(1.0, 0.0), labels.to_vec())],
        }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::coherent(&vec![Amplitude::new(0.0, 0.0); modes])
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> &[CoherentTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, factor: Amplitude) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| CoherentTerm::new(t.coeff * factor, t.labels.clone()))
            .collect();
        CoherentSuperposition {
            modes: self.modes,
            terms,
        }
    }

    /// Concatenates the term lists (vector addition without merging).
    pub fn plus(&self, other: &Self) -> Result<Self> {
        check_modes(self.modes, other.modes)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(CoherentSuperposition {
            modes: self.modes,
            terms,
        })
    }

    /// Tensor product; modes of `other` follow those of `self`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut labels = a.labels.clone();
                labels.extend_from_slice(&b.labels);
                terms.push(CoherentTerm::new(a.coeff * b.coeff, labels));
            }
        }
        CoherentSuperposition {
            modes: self.modes + other.modes,
            terms,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        inner_product(self, self)
            .expect("same state has matching modes")
            .re
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Degenerate(format!("state norm {n} cannot be normalized")));
        }
        Ok(self.scaled(Amplitude::new(1.0 / n.sqrt(), 0.0)))
    }

    /// Largest |label|² over all terms and modes.
    pub fn max_label_norm_sqr(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| t.labels.iter())
            .map(|l| l.norm_sqr())
            .fold(0.0, f64::max)
    }

    /// ⟨φ|ψ⟩ contracted on one mode, leaving a state on the remaining modes.
    ///
    /// `probe` must be a single-mode state. Requires at least two modes.
    pub fn project_mode(&self, mode: usize, probe: &Self) -> Result<Self> {
        check_modes(1, probe.modes)?;
        self.check_mode(mode)?;
        if self.modes < 2 {
            return Err(Error::invalid("projecting out the only mode leaves no state"));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let weight = probe_overlap(probe, t.labels[mode]);
                let mut labels = t.labels.clone();
                labels.remove(mode);
                CoherentTerm::new(t.coeff * weight, labels)
            })
            .collect();
        Ok(CoherentSuperposition {
            modes: self.modes - 1,
            terms,
        })
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::invalid(format!(
                "mode index {mode} out of range for {} modes",
                self.modes
            )));
        }
        Ok(())
    }
}

fn check_modes(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::ModeMismatch { expected, found });
    }
    Ok(())
}

/// ⟨φ|a⟩ for a single-mode superposition φ and coherent label a.
fn probe_overlap(probe: &CoherentSuperposition, a: Amplitude) -> Amplitude {
    probe
        .terms
        .iter()
        .map(|p| p.coeff.conj() * coherent_overlap(p.labels[0], a))
        .sum()
}

/// ⟨x|y⟩ = Σ_{i,k} conj(cᵢ) c'_k Π_modes ⟨αᵢ|α'_k⟩.
pub fn inner_product(x: &CoherentSuperposition, y: &CoherentSuperposition) -> Result<Amplitude> {
    check_modes(x.modes, y.modes)?;
    let mut acc = Amplitude::new(0.0, 0.0);
    for a in &x.terms {
        for b in &y.terms {
            acc += a.coeff.conj() * b.coeff * multimode_overlap(&a.labels, &b.labels);
        }
    }
    Ok(acc)
}

/// ⟨ψ| ⊗_m P_m |ψ⟩ where P_m = |φ_m⟩⟨φ_m| when `probes[m]` is set and the
/// identity otherwise. Each φ_m is a single-mode superposition.
pub fn projector_expectation(
    state: &CoherentSuperposition,
    probes: &[Option<&CoherentSuperposition>],
) -> Result<Amplitude> {
    check_modes(state.modes, probes.len())?;
    for p in probes.iter().flatten() {
        check_modes(1, p.modes)?;
    }
    let free: Vec<usize> = (0..state.modes).filter(|&m| probes[m].is_none()).collect();
    // g[i][m] = ⟨φ_m | α_{i,m}⟩ for each probed mode
    let projections: Vec<Amplitude> = state
        .terms
        .iter()
        .map(|t| {
            probes
                .iter()
                .enumerate()
                .filter_map(|(m, p)| p.map(|p| probe_overlap(p, t.labels[m])))
                .product()
        })
        .collect();
    let mut acc = Amplitude::new(0.0, 0.0);
    for (a, ga) in state.terms.iter().zip(&projections) {
        for (b, gb) in state.terms.iter().zip(&projections) {
            let ln_free: Amplitude = free
                .iter()
                .map(|&m| ln_overlap(a.labels[m], b.labels[m]))
                .sum();
            acc += a.coeff.conj() * b.coeff * ga.conj() * gb * ln_free.exp();
        }
    }
    Ok(acc)
}

/// The two 50:50 beam-splitter conventions of the phase-encoded BB84 receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BeamSplitter {
    /// (α, β) → ((α+β)/√2, (α−β)/√2)
    X,
    /// (α, β) → ((α+iβ)/√2, (α−iβ)/√2)
    Y,
}

impl BeamSplitter {
    /// Mode matrix U acting on labels: out = U · (α, β).
    pub fn matrix(self) -> [[Amplitude; 2]; 2] {
        let s = Amplitude::new(FRAC_1_SQRT_2, 0.0);
        let t = match self {
            BeamSplitter::X => Amplitude::new(FRAC_1_SQRT_2, 0.0),
            BeamSplitter::Y => Amplitude::new(0.0, FRAC_1_SQRT_2),
        };
        [[s, t], [s, -t]]
    }

    pub fn apply(self, alpha: Amplitude, beta: Amplitude) -> (Amplitude, Amplitude) {
        let u = self.matrix();
        (
            u[0][0] * alpha + u[0][1] * beta,
            u[1][0] * alpha + u[1][1] * beta,
        )
    }
}

/// Applies a 50:50 beam splitter to the labels of modes `mode_a`, `mode_b`.
pub fn beam_splitter(
    state: &CoherentSuperposition,
    mode_a: usize,
    mode_b: usize,
    variant: BeamSplitter,
) -> Result<CoherentSuperposition> {
    check_mode_pair(state.modes, mode_a, mode_b)?;
    let terms = state
        .terms
        .iter()
        .map(|t| {
            let mut labels = t.labels.clone();
            let (a, b) = variant.apply(labels[mode_a], labels[mode_b]);
            labels[mode_a] = a;
            labels[mode_b] = b;
            CoherentTerm::new(t.coeff, labels)
        })
        .collect();
    Ok(CoherentSuperposition {
        modes: state.modes,
        terms,
    })
}

pub(crate) fn check_mode_pair(modes: usize, a: usize, b: usize) -> Result<()> {
    if a == b || a >= modes || b >= modes {
        return Err(Error::invalid(format!(
            "beam splitter needs two distinct modes below {modes}, got ({a}, {b})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    #[test]
    fn overlap_closed_form_values() {
        assert_eq!(coherent_overlap(c(0.0, 0.0), c(0.0, 0.0)), c(1.0, 0.0));
        let a = c(0.7, -1.3);
        assert!((coherent_overlap(a, a) - c(1.0, 0.0)).norm() < 1e-15);
        // Fock series Σ e^{-μ}(-μ)ⁿ/n! at μ = 1
        let series: f64 = (0..40)
            .map(|n| (-1.0f64).exp() * (-1.0f64).powi(n) / crate::special::ln_factorial(n as u64).exp())
            .sum();
        let closed = coherent_overlap(c(1.0, 0.0), c(-1.0, 0.0));
        assert!((closed.re - (-2.0f64).exp()).abs() < 1e-15);
        assert!((closed.re - series).abs() < 1e-14);
        assert!((closed.re - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn fock_amplitude_values() {
        assert_eq!(fock_amplitude(c(0.0, 0.0), 0), c(1.0, 0.0));
        assert_eq!(fock_amplitude(c(0.0, 0.0), 3), c(0.0, 0.0));
        let v = fock_amplitude(c(1.0, 0.0), 2);
        assert!((v.re - (-0.5f64).exp() / 2f64.sqrt()).abs() < 1e-15);
        assert!((v.re - 0.428882).abs() < 1e-6);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn fock_amplitude_survives_large_n() {
        let a = c(15.0, 0.0);
        let peak = fock_amplitude(a, 225);
        assert!(peak.norm().is_finite() && peak.norm() > 0.0);
        let far = fock_amplitude(c(0.5, 0.0), 400);
        assert!(far.norm().is_finite());
    }

    #[test]
    fn beam_splitter_arms() {
        let a = c(0.6, 0.2);
        let s = CoherentSuperposition::coherent(&[a, a]);
        let out = beam_splitter(&s, 0, 1, BeamSplitter::X).unwrap();
        let l = &out.terms()[0].labels;
        assert!((l[0] - a * 2f64.sqrt()).norm() < 1e-15);
        assert!(l[1].norm() < 1e-15);

        let s = CoherentSuperposition::coherent(&[a, -a]);
        let out = beam_splitter(&s, 0, 1, BeamSplitter::X).unwrap();
        let l = &out.terms()[0].labels;
        assert!(l[0].norm() < 1e-15);
        assert!((l[1] - a * 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn beam_splitter_rejects_bad_modes() {
        let s = CoherentSuperposition::vacuum(2);
        assert!(beam_splitter(&s, 0, 0, BeamSplitter::X).is_err());
        assert!(beam_splitter(&s, 0, 2, BeamSplitter::Y).is_err());
    }

    #[test]
    fn inner_product_mode_mismatch() {
        let a = CoherentSuperposition::vacuum(1);
        let b = CoherentSuperposition::vacuum(2);
        assert!(matches!(
            inner_product(&a, &b),
            Err(Error::ModeMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn new_checks_label_count() {
        let bad = CoherentTerm::new(c(1.0, 0.0), vec![c(0.0, 0.0)]);
        assert!(CoherentSuperposition::new(2, vec![bad]).is_err());
    }

    #[test]
    fn vacuum_projection_of_coherent_state() {
        let a = c(0.8, 0.0);
        let s = CoherentSuperposition::coherent(&[a, c(0.3, 0.1)]);
        let vac = CoherentSuperposition::vacuum(1);
        let p = projector_expectation(&s, &[Some(&vac), None]).unwrap();
        assert!((p.re - (-0.64f64).exp()).abs() < 1e-15);
        let both = projector_expectation(&s, &[Some(&vac), Some(&vac)]).unwrap();
        assert!((both.re - (-0.64f64 - 0.1).exp()).abs() < 1e-15);
    }

    #[test]
    fn project_mode_drops_mode() {
        let a = c(0.5, 0.0);
        let b = c(0.0, 0.7);
        let s = CoherentSuperposition::coherent(&[a, b]);
        let probe = CoherentSuperposition::coherent(&[a]);
        let rest = s.project_mode(0, &probe).unwrap();
        assert_eq!(rest.mode_count(), 1);
        assert!((rest.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((rest.terms()[0].labels[0] - b).norm() == 0.0);
    }
}
