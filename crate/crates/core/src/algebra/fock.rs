//! Truncated photon-number representation.
//!
//! Used only as a numerical oracle for the closed-form coherent path and for
//! quantities that need an explicit matrix (eigen-decompositions).

use num_complex::Complex64;

use super::{check_mode_pair, fock_amplitude, inner_product, BeamSplitter, CoherentSuperposition};
use crate::error::{Error, Result};
use crate::special::{auto_cutoff, ln_factorial};

/// Relative norm leak tolerated by [`to_fock`].
pub const TO_FOCK_LEAK_TOLERANCE: f64 = 1e-10;

/// Relative norm leak above which a Fock-space beam splitter is rejected.
pub const BEAM_SPLITTER_LEAK_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// Poisson tail of the largest |label|² below 1e-14, plus two guard levels.
    Auto,
    Fixed(usize),
}

/// Dense amplitudes over (n₁,…,n_m) with every nᵢ ≤ cutoff, row-major with
/// mode 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    modes: usize,
    cutoff: usize,
    amps: Vec<Complex64>,
}

impl FockVector {
    pub fn zeros(modes: usize, cutoff: usize) -> Self {
        assert!(modes > 0);
        let len = (cutoff + 1).pow(modes as u32);
        FockVector {
            modes,
            cutoff,
            amps: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_amplitudes(modes: usize, cutoff: usize, amps: Vec<Complex64>) -> Result<Self> {
        if modes == 0 || amps.len() != (cutoff + 1).pow(modes as u32) {
            return Err(Error::invalid(format!(
                "{} amplitudes do not fill {modes} modes at cutoff {cutoff}",
                amps.len()
            )));
        }
        Ok(FockVector {
            modes,
            cutoff,
            amps,
        })
    }

    /// The number state |n₁,…,n_m⟩.
    pub fn number_state(ns: &[usize], cutoff: usize) -> Result<Self> {
        let mut v = FockVector::zeros(ns.len(), cutoff);
        let idx = v.index(ns)?;
        v.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn index(&self, ns: &[usize]) -> Result<usize> {
        if ns.len() != self.modes {
            return Err(Error::ModeMismatch {
                expected: self.modes,
                found: ns.len(),
            });
        }
        let mut idx = 0;
        for &n in ns {
            if n > self.cutoff {
                return Err(Error::invalid(format!(
                    "photon number {n} above cutoff {}",
                    self.cutoff
                )));
            }
            idx = idx * (self.cutoff + 1) + n;
        }
        Ok(idx)
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let base = self.cutoff + 1;
        let mut ns = vec![0; self.modes];
        for slot in ns.iter_mut().rev() {
            *slot = idx % base;
            idx /= base;
        }
        ns
    }

    /// Amplitude ⟨n₁,…,n_m|ψ⟩; zero beyond the cutoff.
    pub fn amplitude(&self, ns: &[usize]) -> Complex64 {
        match self.index(ns) {
            Ok(i) => self.amps[i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_space(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.cutoff != other.cutoff {
            return Err(Error::invalid("tensor product needs equal cutoffs"));
        }
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(FockVector {
            modes: self.modes + other.modes,
            cutoff: self.cutoff,
            amps,
        })
    }

    /// Applies `f(multi_index, amplitude)` to every amplitude.
    pub fn map_indexed(&self, f: impl Fn(&[usize], Complex64) -> Complex64) -> Self {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| f(&self.multi_index(i), a))
            .collect();
        FockVector {
            modes: self.modes,
            cutoff: self.cutoff,
            amps,
        }
    }

    /// Σ_n |ψ_n|² g(n) for a single-mode vector.
    pub fn photon_expectation(&self, g: impl Fn(usize) -> f64) -> Result<f64> {
        if self.modes != 1 {
            return Err(Error::ModeMismatch {
                expected: 1,
                found: self.modes,
            });
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(n, a)| a.norm_sqr() * g(n))
            .sum())
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch {
                expected: self.modes,
                found: other.modes,
            });
        }
        if self.cutoff != other.cutoff {
            return Err(Error::invalid(format!(
                "cutoff mismatch: {} vs {}",
                self.cutoff, other.cutoff
            )));
        }
        Ok(())
    }
}

impl Cutoff {
    pub fn resolve(self, state: &CoherentSuperposition) -> usize {
        match self {
            Cutoff::Auto => auto_cutoff(state.max_label_norm_sqr()),
            Cutoff::Fixed(n) => n,
        }
    }
}

/// [`to_fock_with_tolerance`] at [`TO_FOCK_LEAK_TOLERANCE`].
pub fn to_fock(state: &CoherentSuperposition, cutoff: Cutoff) -> Result<FockVector> {
    to_fock_with_tolerance(state, cutoff, TO_FOCK_LEAK_TOLERANCE)
}

/// Expands a coherent superposition on the truncated number basis.
///
/// Fails with [`Error::Truncation`] when the relative norm lost to the
/// cutoff exceeds `tolerance`.
pub fn to_fock_with_tolerance(
    state: &CoherentSuperposition,
    cutoff: Cutoff,
    tolerance: f64,
) -> Result<FockVector> {
    if state.is_empty() {
        return Err(Error::invalid("cannot expand a state with no terms"));
    }
    let cutoff = cutoff.resolve(state);
    let modes = state.mode_count();
    let mut out = FockVector::zeros(modes, cutoff);
    let dim = cutoff + 1;
    let mut per_mode = vec![vec![Complex64::new(0.0, 0.0); dim]; modes];
    for term in state.terms() {
        for (m, &label) in term.labels.iter().enumerate() {
            for (n, slot) in per_mode[m].iter_mut().enumerate() {
                *slot = fock_amplitude(label, n as u64);
            }
        }
        for (i, amp) in out.amps.iter_mut().enumerate() {
            let mut rest = i;
            let mut value = term.coeff;
            for m in (0..modes).rev() {
                value *= per_mode[m][rest % dim];
                rest /= dim;
            }
            *amp += value;
        }
    }
    let exact = inner_product(state, state)?.re;
    let leak = (exact - out.norm_sqr()) / exact;
    if leak > tolerance {
        return Err(Error::Truncation {
            cutoff,
            leak,
            tolerance,
        });
    }
    Ok(out)
}

/// Number-basis 50:50 beam splitter on modes `mode_a`, `mode_b`, keeping the
/// input cutoff. Same conventions as [`super::beam_splitter`].
pub fn fock_beam_splitter(
    state: &FockVector,
    mode_a: usize,
    mode_b: usize,
    variant: BeamSplitter,
) -> Result<FockVector> {
    check_mode_pair(state.modes, mode_a, mode_b)?;
    let cutoff = state.cutoff;
    let u = variant.matrix();
    // a† → u00 c† + u10 d†,  b† → u01 c† + u11 d†
    let powers = |z: Complex64| -> Vec<Complex64> {
        let mut p = Vec::with_capacity(cutoff + 1);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..=cutoff {
            p.push(acc);
            acc *= z;
        }
        p
    };
    let (p00, p10, p01, p11) = (powers(u[0][0]), powers(u[1][0]), powers(u[0][1]), powers(u[1][1]));
    let ln_binom = |n: usize, k: usize| {
        ln_factorial(n as u64) - ln_factorial(k as u64) - ln_factorial((n - k) as u64)
    };

    let mut out = FockVector::zeros(state.modes, cutoff);
    for (i, &amp) in state.amps.iter().enumerate() {
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut ns = state.multi_index(i);
        let (n, m) = (ns[mode_a], ns[mode_b]);
        let ln_norm = -0.5 * (ln_factorial(n as u64) + ln_factorial(m as u64));
        for k in 0..=n {
            for l in 0..=m {
                let first = k + l;
                let second = n + m - first;
                if first > cutoff || second > cutoff {
                    continue;
                }
                let ln_mag = ln_norm
                    + ln_binom(n, k)
                    + ln_binom(m, l)
                    + 0.5 * (ln_factorial(first as u64) + ln_factorial(second as u64));
                let phase = p00[k] * p10[n - k] * p01[l] * p11[m - l];
                ns[mode_a] = first;
                ns[mode_b] = second;
                let j = out.index(&ns).expect("indices within cutoff");
                out.amps[j] += amp * phase * ln_mag.exp();
            }
        }
    }
    let before = state.norm_sqr();
    let leak = (before - out.norm_sqr()) / before;
    if leak > BEAM_SPLITTER_LEAK_TOLERANCE {
        return Err(Error::Truncation {
            cutoff,
            leak,
            tolerance: BEAM_SPLITTER_LEAK_TOLERANCE,
        });
    }
    Ok(out)
}
