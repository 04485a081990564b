use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{quantity}: {value:e} is outside the valid domain ({reason})")]
    Domain {
        quantity: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("shallow well at bias {bias:e} A: barrier {barrier:e} J does not hold a level of {level:e} J")]
    ShallowWell { bias: f64, barrier: f64, level: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("step of {substeps} substeps exceeds the integrator budget (dt = {dt:e} s)")]
    StepSize { dt: f64, substeps: usize },

    #[error("non-finite amplitude encountered at t = {time:e} s")]
    NonFinite { time: f64 },

    #[error("insufficient data for {what}: need {needed}, have {have}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        have: usize,
    },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("fit did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("missing calibration table for fast-rate mode")]
    MissingCalibration,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            quantity,
            value,
            reason,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the data being analysed rather than by
    /// configuration or usage.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InsufficientData { .. }
                | Error::Degenerate(_)
                | Error::NonConvergence { .. }
                | Error::NonFinite { .. }
        )
    }
}
