use thiserror::Error;

/// Errors produced by the solvers and numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameters outside the solver domain: {0}")]
    Regime(String),

    #[error("argument outside the domain of {function}: {value}")]
    Domain { function: &'static str, value: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    #[error("non-finite integrand value at r = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("root is not bracketed: f({a}) = {fa:e}, f({b}) = {fb:e}")]
    InvalidBracket { a: f64, b: f64, fa: f64, fb: f64 },

    #[error("root finder exceeded {iterations} iterations; best bracket [{lo}, {hi}]")]
    RootNonConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("objective is not finite at {0}")]
    NonFiniteObjective(String),

    #[error("{0}")]
    Solver(String),

    #[error("mass curve is not monotone in q; inspect the pre-scan: {0}")]
    NonMonotone(String),
}

pub type Result<T> = std::result::Result<T, Error>;
