use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The state has no well-defined normalization (e.g. |j_d> with j > 0 at mu = 0).
    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("mode mismatch: expected {expected} modes, got {found}")]
    ModeMismatch { expected: usize, found: usize },

    #[error("truncation leak {leak:.3e} exceeds tolerance {tolerance:.1e} at cutoff {cutoff}")]
    Truncation {
        cutoff: usize,
        leak: f64,
        tolerance: f64,
    },

    /// A quantity that must be real or bounded left its tolerance band.
    #[error("numerical diagnostic failed for {quantity}: residue {residue:.3e} > {tolerance:.1e}")]
    Residue {
        quantity: &'static str,
        residue: f64,
        tolerance: f64,
    },
}

impl Error {
    /// Machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) | Error::Degenerate(_) | Error::ModeMismatch { .. } => {
                "invalid-parameter"
            }
            Error::Truncation { .. } => "truncation",
            Error::Residue { .. } => "numerical-diagnostic",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

/// Clamps `value` into [lo, hi] when it lies within `tolerance` of the band,
/// and reports a [`Error::Residue`] otherwise.
pub(crate) fn clamp_within(
    quantity: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    tolerance: f64,
) -> Result<f64> {
    let excess = (lo - value).max(value - hi).max(0.0);
    if excess > tolerance || value.is_nan() {
        return Err(Error::Residue {
            quantity,
            residue: if value.is_nan() { f64::NAN } else { excess },
            tolerance,
        });
    }
    Ok(value.clamp(lo, hi))
}
