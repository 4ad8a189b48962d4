use thiserror::Error;

/// Errors raised by the numerical routines. Quadrature non-convergence is
/// never an error: it is reported through the `converged` flags instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid vierbein set {0}; expected 1 or 2")]
    InvalidSet(u8),
    #[error("coincident momenta: |p - r|^2 = {0:e} is below tolerance")]
    Coincidence(f64),
    #[error("argument {0} exceeds the overflow guard; use the damped form")]
    Overflow(f64),
    #[error("regulator fit is rank deficient")]
    RankDeficient,
    #[error("pole at s = {0}")]
    Pole(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
