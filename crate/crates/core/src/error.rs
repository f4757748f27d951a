use thiserror::Error;

/// Errors produced by the numeric and simulation layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "quadrature failed in {context}: error estimate {abs_error:.3e} \
         did not meet tolerance (best value {value:.6e})"
    )]
    Quadrature {
        context: &'static str,
        value: f64,
        abs_error: f64,
    },

    #[error(
        "tail bound exceeded in {context}: envelope {envelope:.3e} > cutoff {cutoff:.3e}"
    )]
    TailBound {
        context: &'static str,
        envelope: f64,
        cutoff: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("{name} must be finite and >= 0, got {x}")));
    }
    Ok(())
}
