//! Operators: exact coherent dyad expansions and their dense Fock matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fock::{to_fock_with_tolerance, Cutoff, FockVector, TO_FOCK_LEAK_TOLERANCE};
use super::{inner_product, multimode_overlap, Amplitude, CoherentSuperposition};
use crate::error::{Error, Result};
use crate::special::{auto_cutoff, ln_factorial};

/// One term c · |ket⟩⟨bra| of an operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dyad {
    pub coeff: Amplitude,
    pub ket: Vec<Amplitude>,
    pub bra: Vec<Amplitude>,
}

/// Operator Σ c |ket⟩⟨bra| over product coherent states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentDyadOperator {
    modes: usize,
    dyads: Vec<Dyad>,
}

impl CoherentDyadOperator {
    pub fn new(modes: usize, dyads: Vec<Dyad>) -> Result<Self> {
        for d in &dyads {
            if d.ket.len() != modes || d.bra.len() != modes {
                return Err(Error::ModeMismatch {
                    expected: modes,
                    found: d.ket.len().max(d.bra.len()),
                });
            }
        }
        Ok(CoherentDyadOperator { modes, dyads })
    }

    /// |ψ⟩⟨ψ|.
    pub fn projector(state: &CoherentSuperposition) -> Self {
        Self::mixture(&[(1.0, state)]).expect("single state has consistent modes")
    }

    /// Σ_k w_k |ψ_k⟩⟨ψ_k|.
    pub fn mixture(components: &[(f64, &CoherentSuperposition)]) -> Result<Self> {
        let modes = components
            .first()
            .map(|(_, s)| s.mode_count())
            .ok_or_else(|| Error::invalid("empty mixture"))?;
        let mut dyads = Vec::new();
        for &(w, s) in components {
            if s.mode_count() != modes {
                return Err(Error::ModeMismatch {
                    expected: modes,
                    found: s.mode_count(),
                });
            }
            for a in s.terms() {
                for b in s.terms() {
                    dyads.push(Dyad {
                        coeff: a.coeff * b.coeff.conj() * w,
                        ket: a.labels.clone(),
                        bra: b.labels.clone(),
                    });
                }
            }
        }
        Ok(CoherentDyadOperator { modes, dyads })
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn dyads(&self) -> &[Dyad] {
        &self.dyads
    }

    /// Tr O = Σ c ⟨bra|ket⟩.
    pub fn trace(&self) -> Amplitude {
        self.dyads
            .iter()
            .map(|d| d.coeff * multimode_overlap(&d.bra, &d.ket))
            .sum()
    }

    /// ⟨ψ|O|ψ⟩.
    pub fn expectation(&self, state: &CoherentSuperposition) -> Result<Amplitude> {
        if state.mode_count() != self.modes {
            return Err(Error::ModeMismatch {
                expected: self.modes,
                found: state.mode_count(),
            });
        }
        let mut acc = Amplitude::new(0.0, 0.0);
        for d in &self.dyads {
            let ket = CoherentSuperposition::coherent(&d.ket);
            let bra = CoherentSuperposition::coherent(&d.bra);
            acc += d.coeff * inner_product(state, &ket)? * inner_product(&bra, state)?;
        }
        Ok(acc)
    }

    /// Largest mismatch between a dyad and its Hermitian partner
    /// (c, a, b) ↔ (c*, b, a); infinite when a partner is missing.
    pub fn hermiticity_residue(&self) -> f64 {
        const LABEL_TOL: f64 = 1e-12;
        let same = |x: &[Amplitude], y: &[Amplitude]| {
            x.iter().zip(y).all(|(a, b)| (a - b).norm() <= LABEL_TOL)
        };
        let mut worst: f64 = 0.0;
        for d in &self.dyads {
            let partner = self
                .dyads
                .iter()
                .filter(|e| same(&e.ket, &d.bra) && same(&e.bra, &d.ket))
                .map(|e| (e.coeff - d.coeff.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(partner);
        }
        worst
    }

    pub fn max_label_norm_sqr(&self) -> f64 {
        self.dyads
            .iter()
            .flat_map(|d| d.ket.iter().chain(&d.bra))
            .map(|l| l.norm_sqr())
            .fold(0.0, f64::max)
    }

    /// Dense matrix on the truncated number basis.
    pub fn to_fock(&self, cutoff: Cutoff) -> Result<FockOperator> {
        let cutoff = match cutoff {
            Cutoff::Auto => auto_cutoff(self.max_label_norm_sqr()),
            Cutoff::Fixed(n) => n,
        };
        let expand = |labels: &[Amplitude]| {
            to_fock_with_tolerance(
                &CoherentSuperposition::coherent(labels),
                Cutoff::Fixed(cutoff),
                TO_FOCK_LEAK_TOLERANCE,
            )
        };
        let dim = (cutoff + 1).pow(self.modes as u32);
        let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
        for d in &self.dyads {
            let ket = expand(&d.ket)?;
            let bra = expand(&d.bra)?;
            for (r, k) in ket.amplitudes().iter().enumerate() {
                let scaled = d.coeff * k;
                for (col, b) in bra.amplitudes().iter().enumerate() {
                    matrix[(r, col)] += scaled * b.conj();
                }
            }
        }
        Ok(FockOperator {
            modes: self.modes,
            cutoff,
            matrix,
        })
    }
}

/// Dense operator on a truncated number basis (same indexing as [`FockVector`]).
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    modes: usize,
    cutoff: usize,
    matrix: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn from_matrix(modes: usize, cutoff: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = (cutoff + 1).pow(modes as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, expected {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(FockOperator {
            modes,
            cutoff,
            matrix,
        })
    }

    /// Σ_k w_k |v_k⟩⟨v_k|.
    pub fn mixture(components: &[(f64, &FockVector)]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::invalid("empty mixture"))?
            .1;
        let (modes, cutoff) = (first.mode_count(), first.cutoff());
        let dim = first.amplitudes().len();
        let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
        for &(w, v) in components {
            if v.mode_count() != modes || v.cutoff() != cutoff {
                return Err(Error::invalid("mixture components live in different spaces"));
            }
            let col = nalgebra::DVector::from_column_slice(v.amplitudes());
            matrix += (&col * col.adjoint()) * Complex64::new(w, 0.0);
        }
        Ok(FockOperator {
            modes,
            cutoff,
            matrix,
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Max |A - A†| entry.
    pub fn hermiticity_residue(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Photon loss with transmission η on a single-mode operator, applied
    /// through the Kraus operators E_k = Σ_n √C(n,k) η^{(n-k)/2} (1-η)^{k/2} |n-k⟩⟨n|.
    pub fn attenuate(&self, eta: f64) -> Result<Self> {
        if self.modes != 1 {
            return Err(Error::ModeMismatch {
                expected: 1,
                found: self.modes,
            });
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(format!("transmission {eta} outside (0, 1]")));
        }
        let dim = self.cutoff + 1;
        let mut out = DMatrix::<Complex64>::zeros(dim, dim);
        for k in 0..dim {
            let mut kraus = DMatrix::<Complex64>::zeros(dim, dim);
            for n in k..dim {
                let ln_binom =
                    ln_factorial(n as u64) - ln_factorial(k as u64) - ln_factorial((n - k) as u64);
                let lost = if k == 0 { 0.0 } else { k as f64 * (1.0 - eta).ln() };
                let kept = if n == k { 0.0 } else { (n - k) as f64 * eta.ln() };
                kraus[(n - k, n)] = Complex64::new((0.5 * (ln_binom + lost + kept)).exp(), 0.0);
            }
            out += &kraus * &self.matrix * kraus.adjoint();
        }
        Ok(FockOperator {
            modes: 1,
            cutoff: self.cutoff,
            matrix: out,
        })
    }

    /// Uhlmann fidelity Tr √(√ρ σ √ρ) (root convention: 1 for equal states,
    /// |⟨ψ|φ⟩| for pure states).
    ///
    /// Evaluated as the trace norm ‖√ρ √σ‖₁ over the numerical supports of
    /// both operators; eigenvalues below 1e-12 of the largest are treated
    /// as rounding noise.
    pub fn uhlmann_fidelity(&self, other: &Self) -> Result<f64> {
        if self.matrix.shape() != other.matrix.shape() {
            return Err(Error::invalid("fidelity needs operators of equal dimension"));
        }
        let a = psd_factor(&self.matrix);
        let b = psd_factor(&other.matrix);
        if a.ncols() == 0 || b.ncols() == 0 {
            return Ok(0.0);
        }
        let overlap = a.adjoint() * b;
        Ok(overlap.svd(false, false).singular_values.iter().sum())
    }
}

/// F with F F† = m, restricted to the numerical support of m.
fn psd_factor(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    const SUPPORT_TOL: f64 = 1e-12;
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let largest = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > SUPPORT_TOL * largest)
        .collect();
    let mut factor = DMatrix::<Complex64>::zeros(m.nrows(), keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let scale = Complex64::new(eig.eigenvalues[i].sqrt(), 0.0);
        factor.set_column(col, &(eig.eigenvectors.column(i) * scale));
    }
    factor
}
