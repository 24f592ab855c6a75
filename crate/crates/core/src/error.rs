use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("fields are bound to different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("Lambda^{s} with s < 0 is undefined on a field with nonzero mean")]
    NonzeroMean { s: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite values in {0} (likely under-resolved)")]
    NonFinite(String),

    #[error("inadmissible exponents: {0}")]
    Exponents(String),

    #[error("cannot rescale a zero field to a positive target norm")]
    ZeroField,

    #[error("run aborted: {0}")]
    Aborted(String),

    #[error("corrupt or mismatched checkpoint: {0}")]
    Checkpoint(String),

    #[error("invalid configuration:{}", list_issues(.0))]
    Config(Vec<crate::io::ConfigIssue>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

fn list_issues(issues: &[crate::io::ConfigIssue]) -> String {
    issues.iter().map(|i| format!("\n  {i}")).collect()
}
