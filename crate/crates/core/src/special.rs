//! Factorials, Poisson series and photon-number classes.
//!
//! Everything here works in log space so that large photon numbers and
//! large mean photon numbers neither overflow nor underflow.

use std::sync::OnceLock;

/// Largest n for which n! is representable as a finite f64.
const MAX_EXACT_FACTORIAL: usize = 170;

/// Relative size below which a series term is dropped.
pub const SERIES_RELATIVE_CUTOFF: f64 = 1e-30;

/// Poisson tail mass tolerated beyond an automatically chosen cutoff.
pub const AUTO_TAIL_TOLERANCE: f64 = 1e-14;

/// Extra levels added on top of the tail-based cutoff.
pub const AUTO_GUARD_LEVELS: usize = 2;

fn ln_factorial_table() -> &'static [f64; MAX_EXACT_FACTORIAL + 1] {
    static TABLE: OnceLock<[f64; MAX_EXACT_FACTORIAL + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; MAX_EXACT_FACTORIAL + 1];
        let mut fact = 1.0_f64;
        for (n, slot) in table.iter_mut().enumerate().skip(1) {
            fact *= n as f64;
            *slot = fact.ln();
        }
        table
    })
}

/// ln(n!) = ln Γ(n + 1).
///
/// Tabulated exactly up to 170!, Stirling series with four correction terms
/// beyond (truncation error far below f64 resolution for n > 170).
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) <= MAX_EXACT_FACTORIAL {
        return ln_factorial_table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}

/// ln of the Poisson weight e^{-λ} λⁿ / n!; `-inf` when λ = 0 and n > 0.
pub fn ln_poisson(lambda: f64, n: u64) -> f64 {
    if lambda == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -lambda + n as f64 * lambda.ln() - ln_factorial(n)
}

/// The photon numbers n ≡ j (mod d) of a Poisson(μ) distribution.
///
/// `weights` are the terms e^{-μ}μⁿ/n! divided by exp(`ln_scale`), so that
/// the largest retained term is 1. The series is cut once n is past the
/// mean and the next term drops below [`SERIES_RELATIVE_CUTOFF`] times the
/// running sum.
#[derive(Debug, Clone)]
pub struct PhotonClass {
    pub ln_scale: f64,
    pub terms: Vec<(u64, f64)>,
}

impl PhotonClass {
    pub fn new(mu: f64, d: u32, j: u32) -> Self {
        debug_assert!(d >= 1 && j < d && mu >= 0.0);
        let (d, j) = (d as u64, j as u64);
        if mu == 0.0 {
            let terms = if j == 0 { vec![(0, 1.0)] } else { Vec::new() };
            return PhotonClass {
                ln_scale: 0.0,
                terms,
            };
        }
        // class member closest to the Poisson mode sets the scale
        let peak = if (mu as u64) < j {
            j
        } else {
            let below = j + ((mu as u64 - j) / d) * d;
            let above = below + d;
            if ln_poisson(mu, above) > ln_poisson(mu, below) {
                above
            } else {
                below
            }
        };
        let ln_scale = ln_poisson(mu, peak);

        let mut terms = Vec::new();
        let mut sum = 0.0;
        let mut n = j;
        loop {
            let w = (ln_poisson(mu, n) - ln_scale).exp();
            if n > peak && w < SERIES_RELATIVE_CUTOFF * sum {
                break;
            }
            if w > 0.0 {
                terms.push((n, w));
                sum += w;
            }
            n += d;
        }
        PhotonClass { ln_scale, terms }
    }

    /// ln(e^{-μ} Σ_{n ≡ j} μⁿ/n!); `-inf` for an empty class.
    pub fn ln_mass(&self) -> f64 {
        let s: f64 = self.terms.iter().map(|&(_, w)| w).sum();
        if s == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.ln_scale + s.ln()
        }
    }

    pub fn mass(&self) -> f64 {
        self.ln_mass().exp()
    }

    /// Σ_n p(n | class) f(n): conditional expectation within the class.
    pub fn conditional_mean(&self, f: impl Fn(u64) -> f64) -> f64 {
        let s: f64 = self.terms.iter().map(|&(_, w)| w).sum();
        self.terms.iter().map(|&(n, w)| w * f(n)).sum::<f64>() / s
    }
}

/// Poisson mass carried by the class n ≡ j (mod d): e^{-μ} Σ_{n ≡ j} μⁿ/n!.
pub fn class_mass(mu: f64, d: u32, j: u32) -> f64 {
    PhotonClass::new(mu, d, j).mass()
}

/// Smallest N with Σ_{n>N} Poisson(λ; n) < [`AUTO_TAIL_TOLERANCE`], plus
/// [`AUTO_GUARD_LEVELS`].
pub fn auto_cutoff(lambda: f64) -> usize {
    assert!(lambda.is_finite() && lambda >= 0.0, "lambda must be finite and >= 0");
    let mut probs = Vec::new();
    let mut n = 0u64;
    loop {
        let p = ln_poisson(lambda, n).exp();
        probs.push(p);
        if n as f64 > lambda && p < 1e-40 {
            break;
        }
        n += 1;
    }
    // tail[k] = sum of probs[k..]
    let mut tail = 0.0;
    let mut cutoff = 0;
    for k in (1..probs.len()).rev() {
        tail += probs[k];
        if tail >= AUTO_TAIL_TOLERANCE {
            cutoff = k;
            break;
        }
    }
    cutoff + AUTO_GUARD_LEVELS
}

/// Binary Shannon entropy in bits; 0 at both endpoints.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}
