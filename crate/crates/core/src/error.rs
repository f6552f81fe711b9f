use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid inner function: {0}")]
    InvalidInner(String),

    #[error("degree {degree} exceeds truncation order {order}")]
    DegreeOutOfBox { degree: String, order: String },

    #[error("operators do not commute: residual {residual:.3e} > {tolerance:.1e}")]
    NonCommuting { residual: f64, tolerance: f64 },

    #[error("trivial quotient: the submodule is the whole truncated space")]
    TrivialQuotient,

    /// A desk-scale or conditioning guard tripped.
    #[error("numerical guard: {0}")]
    Guard(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("inconclusive: enlarge horizon ({0})")]
    Inconclusive(String),

    #[error("recovery failed: enlarge horizon ({0})")]
    RecoveryFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the runner: 2 for configuration problems, 3 for
    /// numerical guards, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::Guard(_) => 3,
            _ => 1,
        }
    }
}
