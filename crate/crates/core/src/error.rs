use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A single validation failure, addressed by its dotted config path.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldIssue {
    pub path: String,
    pub message: String,
}

impl FieldIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field `{name}`: {reason}")]
    InvalidField { name: String, reason: String },

    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid configuration:\n{}", format_issues(.0))]
    Config(Vec<FieldIssue>),

    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("CFL limit exceeded: cfl = {cfl:.3} > {limit}")]
    CflViolation { cfl: f64, limit: f64 },

    #[error("eigen solve failed: {0}")]
    Eigen(String),

    #[error("insufficient data: {found} samples in window, need at least {needed}")]
    InsufficientData { found: usize, needed: usize },

    #[error("non-uniform sample grid at index {index}")]
    NonUniformGrid { index: usize },

    #[error("output directory {0} is not empty (use --force to overwrite)")]
    OutputNotEmpty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures that originate in the numerics rather than in the
    /// user's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InvalidField { .. }
                | Error::NoConvergence { .. }
                | Error::SingularSystem(_)
                | Error::CflViolation { .. }
                | Error::Eigen(_)
                | Error::InsufficientData { .. }
                | Error::NonUniformGrid { .. }
        )
    }
}

fn format_issues(issues: &[FieldIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}
