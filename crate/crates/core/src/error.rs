use thiserror::Error;

/// Errors raised by the model, the integrator and the configuration layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DigestaError {
    /// Fibre-bound water exceeds total water, or the non-fibre mass vanished.
    #[error("degenerate bolus: {0}")]
    DegenerateBolus(String),

    /// Available-water concentration fell to the viscosity guard.
    #[error("viscosity blow-up: available-water concentration {conc_w:.3e} <= {eps_w:.3e}")]
    ViscosityBlowup { conc_w: f64, eps_w: f64 },

    /// A mass dropped below the clamp threshold in a fixed-step run.
    #[error("negative mass in `{field}`: {value:.3e} at t = {t:.6} h")]
    NegativeMass {
        field: &'static str,
        value: f64,
        t: f64,
    },

    /// Step size underflowed the adaptive controller's lower bound.
    #[error("step size underflow at t = {t:.6} h (dt = {dt:.3e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("{0}")]
    Validation(String),

    #[error("unknown parameter path `{0}`")]
    UnknownParameter(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl DigestaError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        DigestaError::Validation(msg.into())
    }

    /// True for configuration problems, as opposed to failures during integration.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            DigestaError::Validation(_)
                | DigestaError::UnknownParameter(_)
                | DigestaError::Parse { .. }
        )
    }
}

impl From<std::io::Error> for DigestaError {
    fn from(err: std::io::Error) -> Self {
        DigestaError::Io(err.to_string())
    }
}

impl From<csv::Error> for DigestaError {
    fn from(err: csv::Error) -> Self {
        DigestaError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DigestaError>;
