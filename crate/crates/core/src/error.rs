use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A grid is too coarse for the requested operation.
    #[error("under-resolved grid: {what} needs {required:.3e}, got {actual:.3e}")]
    UnderResolved {
        what: &'static str,
        required: f64,
        actual: f64,
    },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("solution diverged at t = {t:.4e} (sup |Y| = {sup:.3e})")]
    Diverged { t: f64, sup: f64 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable name of the variant, for machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::UnderResolved { .. } => "under_resolved",
            Error::OutOfDomain(_) => "out_of_domain",
            Error::Quadrature(_) => "quadrature",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::Diverged { .. } => "diverged",
            Error::Format(_) => "format",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
