use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigenvalue {index} did not converge within {sweeps} QL sweeps")]
    Convergence { index: usize, sweeps: usize },

    #[error("integrand returned a non-finite value at x = {abscissa}")]
    Integrand { abscissa: f64 },

    #[error(
        "quadrature did not converge ({context}): estimate {value:e}, error {error_estimate:e} after {evaluations} evaluations"
    )]
    Quadrature {
        context: String,
        value: f64,
        error_estimate: f64,
        evaluations: u64,
    },

    #[error(
        "no eigenstates inside the energy window [{lo}, {hi}]; increase window_factor or the number of realizations"
    )]
    EmptyWindow { lo: f64, hi: f64 },
}
