use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no horizon: mass must be positive (got m = {0})")]
    NoHorizon(f64),

    #[error("point outside the asymptotic chart: |x| = {0} < 1/2")]
    OutOfChart(f64),

    #[error("metric matrix is not invertible at |x| = {0}")]
    SingularMetric(f64),

    #[error("finite-difference step underflow (h = {0})")]
    StepUnderflow(f64),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("bisection bracket failure: {0}")]
    Bracket(String),

    #[error("Jacobi operator numerically singular (smallest |eigenvalue| ratio {0:e})")]
    SingularJacobi(f64),

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("continuation stuck: step underflow at t = {last_good_t}")]
    ContinuationStuck { last_good_t: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::NoHorizon(_) => "no-horizon",
            Error::OutOfChart(_) => "out-of-chart",
            Error::SingularMetric(_) => "singular-metric",
            Error::StepUnderflow(_) => "step-underflow",
            Error::Degenerate(_) => "degenerate",
            Error::Integration(_) => "integration",
            Error::Bracket(_) => "bracket",
            Error::SingularJacobi(_) => "singular-jacobi",
            Error::Divergence { .. } => "divergence",
            Error::ContinuationStuck { .. } => "continuation-stuck",
            Error::Unsupported(_) => "unsupported",
            Error::Precondition(_) => "precondition",
            Error::Refused(_) => "refused",
            Error::NotConverged(_) => "not-converged",
            Error::Parse(_) => "parse",
        }
    }
}
