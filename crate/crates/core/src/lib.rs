//! Detection-probability ring profiles for signal/idler photons produced by
//! four-wave mixing in a Kerr medium.
//!
//! The crate evaluates the single-photon screen profile along a ladder of
//! approximations, each checked against the one above it:
//!
//! * [`amplitude`]: the two-photon amplitude, by direct pump-momentum
//!   integration (S0) and in parameter form (S1);
//! * [`probability`]: the r₂-marginal P(x) from the exact parameter integral
//!   down to the closed sinc² forms;
//! * [`profile`]: scenario presets, radial scans, ring-peak extraction;
//! * [`emit`]: CSV/JSON output.

pub mod amplitude;
pub mod config;
pub mod emit;
pub mod error;
pub mod phasematch;
pub mod probability;
pub mod profile;
pub mod quadrature;

pub use config::{derive_params, validate_config, Closure, DerivedParams, ExperimentConfig};
pub use error::{Error, Result};
pub use probability::ProbabilityStage;
