//! Run configuration, read from a TOML file with one section per subcommand.

use std::path::{Path, PathBuf};

use psp_core::qkd::{ChannelParams, RateOptions};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// `points` values from `min` to `max`, equally spaced in log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.min > 0.0 && self.max >= self.min && self.max.is_finite()) || self.points == 0 {
            return Err(CliError::Config(format!("invalid log grid {self:?}")));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let ratio = (self.max / self.min).ln();
        let last = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.max
                } else {
                    self.min * (ratio * i as f64 / last).exp()
                }
            })
            .collect())
    }
}

/// `start, start + step, ...` up to `stop` inclusive (within half a step).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl LinearGrid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.step > 0.0 && self.stop >= self.start && self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Config(format!("invalid linear grid {self:?}")));
        }
        let n = ((self.stop - self.start) / self.step + 0.5).floor() as usize + 1;
        Ok((0..n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub workers: Option<usize>,
    pub format: Format,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub mu: LogGrid,
    pub d: Vec<u32>,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Fig1Config {
            mu: LogGrid { min: 0.01, max: 20.0, points: 200 },
            d: vec![4, 8, 12],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4Config {
    pub mu: LogGrid,
    pub d: Vec<u32>,
    pub j: Vec<u32>,
}

impl Default for Fig4Config {
    fn default() -> Self {
        Fig4Config {
            mu: LogGrid { min: 1e-3, max: 2.0, points: 200 },
            d: vec![4, 8],
            j: vec![0, 1],
        }
    }
}

/// A pseudo-single-photon curve at fixed phase count and mean photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PspCurve {
    pub d: u32,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig5Config {
    pub distance_km: LinearGrid,
    pub psp: Vec<PspCurve>,
    /// μ grid for the weak-coherent non-decoy optimum.
    pub nondecoy_mu: LogGrid,
    /// μ grid for the weak-coherent decoy optimum.
    pub decoy_mu: LinearGrid,
    /// Re-optimize μ of every PSP curve at each distance over `psp_mu`.
    pub optimize_mu: bool,
    pub psp_mu: LinearGrid,
    pub psp_nondecoy: bool,
    pub triggered: bool,
    /// Meter mean photon number; 2d² when absent.
    pub nu: Option<f64>,
    /// Trigger detector efficiency; the channel's `eta_det` when absent.
    pub eta_trigger: Option<f64>,
}

impl Default for Fig5Config {
    fn default() -> Self {
        Fig5Config {
            distance_km: LinearGrid { start: 0.0, stop: 200.0, step: 1.0 },
            psp: vec![
                PspCurve { d: 4, mu: 0.08 },
                PspCurve { d: 8, mu: 0.45 },
                PspCurve { d: 36, mu: 1.0 },
            ],
            nondecoy_mu: LogGrid { min: 1e-5, max: 1.0, points: 101 },
            decoy_mu: LinearGrid { start: 0.01, stop: 1.5, step: 0.01 },
            optimize_mu: false,
            psp_mu: LinearGrid { start: 0.01, stop: 2.0, step: 0.01 },
            psp_nondecoy: true,
            triggered: true,
            nu: None,
            eta_trigger: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunConfig,
    pub channel: ChannelParams,
    pub rates: RateOptions,
    pub fig1: Fig1Config,
    pub fig4: Fig4Config,
    pub fig5: Fig5Config,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints() {
        let g = LogGrid { min: 0.01, max: 20.0, points: 200 }.values().unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[199], 20.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn linear_grid_is_inclusive() {
        let g = LinearGrid { start: 0.0, stop: 200.0, step: 1.0 }.values().unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g[200], 200.0);
        let g = LinearGrid { start: 0.01, stop: 1.5, step: 0.01 }.values().unwrap();
        assert_eq!(g.len(), 150);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(LogGrid { min: 0.0, max: 1.0, points: 3 }.values().is_err());
        assert!(LogGrid { min: 0.1, max: 1.0, points: 0 }.values().is_err());
        assert!(LinearGrid { start: 0.0, stop: 1.0, step: 0.0 }.values().is_err());
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = Config::default();
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
        let partial = Config::from_toml("[fig1]\nd = [2]\n[channel]\ndistance_km = 5.0\n").unwrap();
        assert_eq!(partial.fig1.d, vec![2]);
        assert_eq!(partial.fig1.mu, Fig1Config::default().mu);
        assert_eq!(partial.channel.distance_km, 5.0);
        assert_eq!(partial.channel.f, 1.16);
        assert!(Config::from_toml("[fig1]\nbogus = 1\n").is_err());
    }
}
