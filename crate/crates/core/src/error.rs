use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the numerical routines and the command-line layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pulse does not decay at the grid boundary (edge/peak = {ratio:.3e}, tolerance {tol:.1e})")]
    NonDecayingPulse { ratio: f64, tol: f64 },

    #[error("eigenvalue found at the search boundary sigma_max = {sigma_max}")]
    SearchRangeTooSmall { sigma_max: f64 },

    #[error("Newton refinement did not converge after {iterations} iterations (|a| = {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("lambda = {lambda} is not an eigenvalue (|a| = {residual:.3e})")]
    NotAnEigenvalue { lambda: String, residual: f64 },

    #[error("root at lambda = {lambda} is degenerate (|a'| = {derivative:.3e})")]
    DegenerateRoot { lambda: String, derivative: f64 },

    #[error("duplicate eigenvalue {0}")]
    DuplicateEigenvalue(String),

    #[error("eigenvalues are not pairwise distinct (|sigma_k - sigma_m| = {0:.3e})")]
    DegenerateEigenvalues(f64),

    #[error("|rho| exceeded 1e150 at t = {t}; shift the time grid")]
    OverflowGuard { t: f64 },

    #[error("grid holds only {captured:.6e} of the required {required:.6e} energy")]
    InsufficientEnergy { captured: f64, required: f64 },

    #[error("spectral density at the Nyquist edge is {ratio:.3e} of the peak")]
    AliasingDetected { ratio: f64 },

    #[error("grid energy drifted by {drift:.3e} (relative)")]
    EnergyDrift { drift: f64 },

    #[error("epsilon = {epsilon} violates the validity condition epsilon < {bound:.3e}")]
    ValidityViolated { epsilon: f64, bound: f64 },

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the CLI: 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Parse(_)
            | Error::DuplicateEigenvalue(_)
            | Error::DegenerateEigenvalues(_)
            | Error::ValidityViolated { .. } => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
