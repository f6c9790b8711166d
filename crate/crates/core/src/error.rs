use thiserror::Error;

/// Errors raised across the risk toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    /// A model parameter lies outside its admissible domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// A function argument (probability, bound, count) is invalid.
    #[error("invalid argument: {0}")]
    Domain(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Convergence { estimate: f64, error: f64 },

    /// Root finding was given an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    /// The requested conditional mean involves a divergent integral.
    #[error("loss has no finite mean above its quantile: {0}")]
    InfiniteMean(String),

    /// The conditioning region carries (numerically) no probability mass.
    #[error("conditioning region has no mass ({mass:e})")]
    DegenerateRegion { mass: f64 },

    /// Copula or GARCH fitting failed.
    #[error("fit failed: {0}")]
    Fit(String),

    /// Input data are malformed.
    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for RiskError {
    fn from(e: std::io::Error) -> Self {
        RiskError::Io(e.to_string())
    }
}

impl From<csv::Error> for RiskError {
    fn from(e: csv::Error) -> Self {
        let row = e
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        RiskError::Data {
            row,
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, RiskError>;
