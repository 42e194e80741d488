//! Command-line front end: figure datasets, key-rate reports and single-point
//! queries, with validated CSV/JSON output and run manifests.

pub mod compute;
pub mod config;
pub mod error;
pub mod output;
pub mod sweeps;
