//! Pseudo-single-photon states: superpositions of weak coherent states
//! equally spaced on a circle in phase space.
//!
//! * [`algebra`]: exact coherent-superposition algebra and Fock-space oracles
//! * [`psp`]: pseudo-number states, normalization, fidelities, photon loss
//! * [`metrics`]: g²(0) and Hong-Ou-Mandel quantities
//! * [`generation`]: cross-Kerr heralded generation and trigger statistics
//! * [`qkd`]: phase-encoded BB84 with pseudo-number sources and key rates

pub mod algebra;
pub mod error;
pub mod generation;
pub mod metrics;
pub mod psp;
pub mod qkd;
pub mod special;

pub use error::{Error, Result};
