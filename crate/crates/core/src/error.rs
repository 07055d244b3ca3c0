use thiserror::Error;

/// Failures of the low-level numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("quadrature failed: {reason}")]
    QuadratureFailure { reason: &'static str },
    #[error("root is not bracketed")]
    NotBracketed,
    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("step size underflow at t = {t}, last valid state {y}")]
    StepSizeUnderflow { t: f64, y: f64 },
    #[error("vector field is not finite at the initial state")]
    NonFiniteInitialSlope,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("measure is not admissible as {role}: {reason}")]
    Inadmissible { role: &'static str, reason: String },
    #[error("integrand order {0} is not supported (k must be at most 4)")]
    InvalidOrder(u32),
    #[error("branching drift beta = {0} is not subcritical")]
    NotSubcritical(f64),
    #[error("second moments of the jump measures are infinite")]
    SecondMomentInfinite,
    #[error("branching mechanism is not strictly convex (sigma = 0 and mu = 0)")]
    DegenerateR,
    #[error("exponential-moment threshold gamma_R must be positive")]
    NoExponentialMoments,
    #[error("lambda = {lambda} lies outside the admissible domain (bound {bound})")]
    OutOfDomain { lambda: f64, bound: f64 },
    #[error("empty effective interval: the open lower-bound set is empty")]
    EmptyEffectiveInterval,
    #[error("simulation scheme is incompatible with the model: {0}")]
    IncompatibleScheme(String),
    #[error("time step too coarse: dt * |beta| = {0} exceeds 0.5")]
    StepTooCoarse(f64),
    #[error("exponential tilt unavailable: {0}")]
    TiltUnavailable(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, Error>;
