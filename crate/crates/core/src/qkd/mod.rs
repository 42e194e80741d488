//! Phase-encoded BB84 with pseudo-single-photon sources.

pub mod channel;
pub mod encoding;
pub mod rates;

pub use channel::{channel_stats, wcs_multiphoton_probability, ChannelParams, ChannelStats, Source};
pub use encoding::{
    basis_fidelity_bound, basis_fidelity_exact, encode, encoded_state, measure_bb84, Basis,
    BasisState, ClickProbabilities, PhaseSet,
};
pub use rates::{
    basis_fidelity, keyrate, keyrate_nondecoy, keyrate_psp_passive, keyrate_psp_triggered,
    keyrate_wcs_decoy, optimize_mu, phase_error_bound, pseudo_state_yield, FidelityConvention,
    KeyRateResult, Protocol, ProtocolKind, RateOptions, YieldModel,
};
