use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degree {degree} is below the minimum {min}")]
    DegreeTooSmall { degree: u32, min: u32 },

    #[error("right-hand side lies outside the column space of Δ(K_a·)")]
    NoSolution,

    #[error("Δ(K_a·) is singular at order {order} (nullity {nullity}); the cone is not generic")]
    NonGenericCone { order: u32, nullity: usize },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("continuation step fell below {min_step:e} at t = {t}")]
    StepFailure { t: f64, min_step: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("index {index} out of range (only {available} available)")]
    IndexOutOfRange { index: usize, available: usize },

    #[error("conical coordinates do not interlace with a")]
    InterlacingViolation,

    #[error("negative radicand {value:e} for component {component}")]
    NegativeRadicand { component: usize, value: f64 },

    #[error("Gram assembly needs a common degree, found {0} and {1}")]
    MixedDegrees(u32, u32),

    #[error("candidate is infeasible: {0}")]
    Infeasible(String),

    #[error("margin {margin:e} is within the evaluation error {error:e}")]
    PrecisionInsufficient { margin: f64, error: f64 },

    #[error("zero isolation failed for P_{ell}^{m}: {reason}")]
    IsolationFailed { ell: u32, m: u32, reason: String },
}
