use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("plan has {plan} decisions but workflow has {tasks} tasks")]
    PlanLength { plan: usize, tasks: usize },

    #[error("{workflows} workflows but {plans} plans")]
    BatchLength { workflows: usize, plans: usize },

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("invalid workflow: {0}")]
    InvalidWorkflow(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("shape mismatch: {0:?} vs {1:?}")]
    Shape(Vec<usize>, Vec<usize>),

    #[error("task index {index} out of range for workflow of {len} tasks")]
    TaskIndex { index: usize, len: usize },

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("replay memory is empty")]
    EmptyMemory,

    #[error("workflow has {tasks} tasks, above the enumeration cap of {cap}")]
    OverCap { tasks: usize, cap: usize },

    #[error("unsupported checkpoint version {0}")]
    CheckpointVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) | Error::Json(_) => "config",
            Error::InvalidEnvironment(_)
            | Error::InvalidWorkflow(_)
            | Error::PlanLength { .. }
            | Error::BatchLength { .. }
            | Error::Dimension { .. }
            | Error::Shape(..)
            | Error::TaskIndex { .. }
            | Error::NonFinite(_)
            | Error::OverCap { .. }
            | Error::CheckpointVersion(_) => "validation",
            Error::EmptyMemory => "runtime",
            Error::Io(_) | Error::Csv(_) => "io",
        }
    }
}
