use thiserror::Error;

/// Errors raised by the model, simulation, and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("projectile position {p} outside the constraint domain [0, {max}]")]
    Domain { p: f64, max: f64 },

    #[error("singular configuration: effective inverse mass W = {w} at p = {p}, l = {l}")]
    SingularConfiguration { w: f64, p: f64, l: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(
        "step size underflow at t = {t}: step {dt} below minimum without meeting tolerance (error estimate {error})"
    )]
    StepUnderflow { t: f64, dt: f64, error: f64 },

    #[error("step budget of {0} exhausted before reaching the end time")]
    StepBudget(usize),

    #[error("event function has no sign change on [{t_lo}, {t_hi}] ({f_lo} vs {f_hi})")]
    NoSignChange { t_lo: f64, t_hi: f64, f_lo: f64, f_hi: f64 },

    #[error("constraint projection did not converge in {iterations} iterations (|h| = {residual})")]
    ProjectionFailure { iterations: usize, residual: f64 },

    #[error("jacobian structure violation at ({row}, {col}): {value}")]
    StructureViolation { row: usize, col: usize, value: f64 },

    #[error("nominal equation denominator {value} is singular at p = {p}, F_L = {f_l}")]
    SingularDenominator { p: f64, f_l: f64, value: f64 },

    #[error("invalid continuation start: {0}")]
    InvalidStart(String),

    #[error("corrector diverged at F_L = {f_l} (step {step})")]
    CorrectorDivergence { f_l: f64, step: f64 },

    #[error("design bound is singular: M R^2 = 1")]
    SingularBound,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status: 1 for invalid input, 2 for numerical or I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_)
            | Error::InvalidArgument(_)
            | Error::InvalidStart(_)
            | Error::InvalidState(_)
            | Error::Config(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
