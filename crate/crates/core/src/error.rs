//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter violates its domain (negative rate, zero normalization, …).
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A denominator of the perturbative formulas vanished (λ = 0 or Γ21 = 0).
    /// These are measure-zero parameter points and are rejected rather than
    /// propagated as infinities.
    #[error("singular parameter combination: {context}")]
    Singular { context: String },

    /// An input collection was empty where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Field amplitudes left the representable range during integration.
    #[error(
        "propagation aborted at Z = {z:.6e}: non-finite field values \
         (step {step:.6e}, spectral-radius bound {spectral_bound:.6e})"
    )]
    NonFinite {
        z: f64,
        step: f64,
        spectral_bound: f64,
    },

    /// The Liouvillian has no unique stationary state (no dissipation).
    #[error("no unique steady state: {0}")]
    NoSteadyState(String),

    /// An iterative solver hit its iteration cap before reaching tolerance.
    #[error("{context}: no convergence within {limit} {unit}")]
    NonConvergence {
        context: &'static str,
        limit: usize,
        unit: &'static str,
    },

    /// The data do not contain the feature an analysis was asked for
    /// (e.g. a transparency window in a single-peaked spectrum).
    #[error("analysis: {0}")]
    Analysis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
