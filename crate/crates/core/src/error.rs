use thiserror::Error;

/// Errors raised by the analytic routes, oracles and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of H(x) at x = {0}")]
    Pole(f64),

    #[error("numerical failure: {message} (worst residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error(
        "routes disagree for {quantity}: {first} vs {second} (oracle bracket [{lower}, {upper}])"
    )]
    RouteDisagreement {
        quantity: String,
        first: f64,
        second: f64,
        lower: f64,
        upper: f64,
    },

    #[error("request too large: {0}")]
    Oversize(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
