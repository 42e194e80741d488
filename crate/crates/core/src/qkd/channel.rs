//! Fiber channel with threshold detectors: yields, gains and error rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{auto_cutoff, ln_poisson};

/// Fiber and detection parameters. `eta_bob` already includes Bob's detector
/// efficiency `eta_det`; the latter is kept for reference and as the default
/// efficiency of the trigger detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub f: f64,
    pub eta_det: f64,
    pub eta_bob: f64,
    pub y0: f64,
    pub e0: f64,
    pub e_det: f64,
    pub alpha_db_per_km: f64,
    pub distance_km: f64,
}

impl Default for ChannelParams {
    /// GYS experiment values at L = 0.
    fn default() -> Self {
        ChannelParams {
            f: 1.16,
            eta_det: 0.12,
            eta_bob: 0.045,
            y0: 1.7e-6,
            e0: 0.5,
            e_det: 0.033,
            alpha_db_per_km: 0.21,
            distance_km: 0.0,
        }
    }
}

impl ChannelParams {
    pub fn at_distance(mut self, distance_km: f64) -> Self {
        self.distance_km = distance_km;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {v} outside [0, 1]")))
            }
        };
        if !(self.f >= 1.0 && self.f.is_finite()) {
            return Err(Error::invalid(format!("error-correction efficiency f = {} must be >= 1", self.f)));
        }
        unit("eta_det", self.eta_det)?;
        unit("y0", self.y0)?;
        unit("e0", self.e0)?;
        unit("e_det", self.e_det)?;
        if !(self.eta_bob > 0.0 && self.eta_bob <= 1.0) {
            return Err(Error::invalid(format!("eta_bob = {} outside (0, 1]", self.eta_bob)));
        }
        if !(self.alpha_db_per_km >= 0.0 && self.alpha_db_per_km.is_finite()) {
            return Err(Error::invalid("fiber loss must be finite and >= 0"));
        }
        if !(self.distance_km >= 0.0 && self.distance_km.is_finite()) {
            return Err(Error::invalid(format!("distance {} must be finite and >= 0", self.distance_km)));
        }
        Ok(())
    }

    /// η = 10^{-αL/10} η_Bob.
    pub fn transmittance(&self) -> f64 {
        10f64.powf(-self.alpha_db_per_km * self.distance_km / 10.0) * self.eta_bob
    }

    /// Y_n = 1 - (1 - Y₀)(1 - η)ⁿ.
    pub fn yield_n(&self, n: u64) -> f64 {
        let eta = self.transmittance();
        let lost = (n as f64 * (-eta).ln_1p()).exp();
        self.y0 + (1.0 - self.y0) * (1.0 - lost)
    }

    /// e_n with e_n Y_n = e₀Y₀ + e_det (Y_n - Y₀).
    pub fn error_n(&self, n: u64) -> f64 {
        self.error_for_yield(self.yield_n(n))
    }

    /// Error rate of any component whose yield is `y`.
    pub fn error_for_yield(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return self.e0;
        }
        (self.e0 * self.y0 + self.e_det * (y - self.y0)) / y
    }
}

/// Photon statistics of Alice's source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    /// Phase-randomized weak coherent pulses.
    Wcs,
    /// Pseudo-number states heralded from a d-phase superposition.
    Psp { d: u32 },
}

/// Channel quantities for one (μ, L) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub eta: f64,
    /// Y_n for n = 0..=cutoff.
    pub yields: Vec<f64>,
    /// e_n for n = 0..=cutoff.
    pub errors: Vec<f64>,
    /// Q_μ = Y₀ + 1 - e^{-ημ}.
    pub gain: f64,
    /// E_μ from Q_μ E_μ = e₀Y₀ + e_det(1 - e^{-ημ}).
    pub qber: f64,
}

/// Total gain and QBER; both sources have Poisson photon statistics in
/// total, so the result does not depend on `source`.
pub fn channel_stats(c: &ChannelParams, mu: f64, source: Source) -> Result<ChannelStats> {
    c.validate()?;
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::invalid(format!("mean photon number {mu} must be finite and >= 0")));
    }
    if let Source::Psp { d } = source {
        if d == 0 {
            return Err(Error::invalid("phase count d must be >= 1"));
        }
    }
    let eta = c.transmittance();
    let cutoff = auto_cutoff(mu) as u64;
    let yields: Vec<f64> = (0..=cutoff).map(|n| c.yield_n(n)).collect();
    let errors = (0..=cutoff).map(|n| c.error_n(n)).collect();
    let detected = -(-eta * mu).exp_m1();
    let gain = c.y0 + detected;
    let qber = (c.e0 * c.y0 + c.e_det * detected) / gain;
    Ok(ChannelStats {
        eta,
        yields,
        errors,
        gain,
        qber: if gain > 0.0 { qber } else { c.e0 },
    })
}

/// e^{-μ} Σ_{n≥2} μⁿ/n!, summed directly to avoid cancellation at small μ.
pub fn wcs_multiphoton_probability(mu: f64) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut n = 2u64;
    loop {
        let term = ln_poisson(mu, n).exp();
        sum += term;
        if n as f64 > mu && term < 1e-30 * sum {
            break;
        }
        n += 1;
    }
    sum
}
