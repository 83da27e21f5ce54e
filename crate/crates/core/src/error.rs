use std::path::PathBuf;

use thiserror::Error;

use crate::config::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(ValidationReport),

    #[error("configuration file: {0}")]
    ConfigFile(String),

    #[error("no closure requested for this configuration")]
    NoClosure,

    #[error("energy closure has no physical solution (denominator {denominator:e} <= 0)")]
    NoPhysicalSolution { denominator: f64 },

    #[error("evanescent wave vector: |k| = {kperp:e} >= 2pi/lambda = {k0:e}")]
    Evanescent { kperp: f64, k0: f64 },

    #[error("angle {degrees} deg is outside the paraxial gate")]
    ParaxialGate { degrees: f64 },

    #[error("critical phase matching not satisfied: relative residual {residual:e}")]
    ConservationResidual { residual: f64 },

    #[error("quadrature rule size {0} outside 2..=512")]
    RuleSize(usize),

    #[error("non-finite integrand sample at ({0}, {1})")]
    NonFinite(f64, f64),

    #[error("adaptive quadrature exceeded {budget} evaluations (relative error {achieved:e})")]
    QuadratureBudget { budget: usize, achieved: f64 },

    #[error("near-singular prefactor: |V| = {0:e}")]
    NearSingular(f64),

    #[error("stage {stage} failed at x = {x}: {source}")]
    Stage {
        stage: String,
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{label}: direct and reduced amplitudes disagree (relative residual {residual:e})")]
    OracleMismatch { label: String, residual: f64 },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("invalid scan request: {0}")]
    InvalidScan(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidConfig(_)
            | Error::ConfigFile(_)
            | Error::NoClosure
            | Error::NoPhysicalSolution { .. }
            | Error::ParaxialGate { .. }
            | Error::ConservationResidual { .. }
            | Error::UnknownScenario(_)
            | Error::InvalidScan(_)
            | Error::RuleSize(_) => true,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
