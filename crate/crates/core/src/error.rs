use thiserror::Error;

/// Errors raised by construction, I/O and enumeration routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed cloud: {0}")]
    MalformedCloud(String),

    #[error("level {level} outside hierarchy range [{k_min}, {k_max}]")]
    LevelOutOfRange { level: i32, k_min: i32, k_max: i32 },

    #[error("enumeration needs {required} outcomes but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("construction invariant violated: {0}")]
    Internal(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
