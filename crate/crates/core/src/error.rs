use thiserror::Error;

/// Errors raised by the solvers, integrators and checkers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("no characteristic overlap: [U] = {jump_u} <= 0, use the vacuum branch")]
    NoOverlap { jump_u: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("time {t} outside the validity window [0, {window}]")]
    OutOfRange { t: f64, window: f64 },

    #[error("entropy condition violated at t = {t}: margin {margin}")]
    EntropyViolation { t: f64, margin: f64 },

    #[error("front mass collapsed to {e} at t = {t}")]
    MassCollapse { t: f64, e: f64 },

    #[error("front radius collapsed to {radius} at t = {t}")]
    RadiusCollapse { t: f64, radius: f64 },

    #[error("quadrature did not reach tolerance {tol} (estimate {estimate}, error {error})")]
    QuadratureFailure { tol: f64, estimate: f64, error: f64 },

    #[error("initial profile carries no mass")]
    EmptySupport,

    #[error("no merged cluster: heaviest particle {max_mass} below threshold {threshold}")]
    NoCluster { max_mass: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
