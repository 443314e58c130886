use std::process::ExitCode;

use strip_spectra_core::eigensolve::SpectrumResult;
use strip_spectra_core::error::Error as CoreError;

/// A violated hypothesis, written to `assumption.json` before exiting.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AssumptionFailure {
    pub assumption: String,
    pub index: Option<usize>,
    pub value: f64,
    pub message: String,
}

/// Failure classes with distinct exit statuses.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}", .0.message)]
    Assumption(AssumptionFailure),
    #[error("solver did not converge: {0}")]
    NotConverged(String, Option<Box<SpectrumResult>>),
    #[error("{0}")]
    Other(#[from] anyhow::Error),
}

impl RunError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.status())
    }

    pub fn status(&self) -> u8 {
        match self {
            RunError::Config(_) => 1,
            RunError::Assumption(_) => 2,
            RunError::NotConverged(..) => 3,
            RunError::Other(_) => 1,
        }
    }

    pub fn config(msg: impl std::fmt::Display) -> Self {
        RunError::Config(msg.to_string())
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::AssumptionViolated { assumption, index, value } => RunError::Assumption(AssumptionFailure {
                assumption: assumption.name().into(),
                index: Some(index),
                value,
                message: e.to_string(),
            }),
            CoreError::NotConverged(partial) => {
                let msg = format!("{} eigenpairs after {} iterations", partial.eigenvalues.len(), partial.iterations);
                RunError::NotConverged(msg, Some(partial))
            }
            CoreError::CgStalled { .. } => RunError::NotConverged(e.to_string(), None),
            CoreError::Hypothesis(_)
            | CoreError::UnknownFamily(_)
            | CoreError::DimensionTooSmall { .. }
            | CoreError::NonPositive { .. }
            | CoreError::TooFewNodes { .. }
            | CoreError::DimensionMismatch { .. }
            | CoreError::OutOfRange { .. }
            | CoreError::WindowTooSmall { .. }
            | CoreError::ShiftNotBelowFloor { .. }
            | CoreError::BendingPresent { .. } => RunError::Config(e.to_string()),
            other => RunError::Other(anyhow::anyhow!(other.to_string())),
        }
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Config(e.to_string())
    }
}

pub type RunResult<T> = Result<T, RunError>;
