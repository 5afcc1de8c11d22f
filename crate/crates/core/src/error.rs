use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate orbit: {0}")]
    Degenerate(String),

    #[error("no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    QuadratureFailure { a: f64, b: f64, estimate: f64 },

    /// Step size collapsed; usually a finite-time singularity of the right-hand side.
    #[error("step size underflow at t = {t} (suspected finite-time singularity)")]
    StepUnderflow { t: f64, state: Vec<f64> },

    #[error("step budget of {0} exhausted")]
    StepBudget(usize),

    #[error("sigma = {0} is a singular value of the comparison curve")]
    SingularSigma(f64),

    #[error("no fixed point in (0, 1): {0}")]
    NoFixedPoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
