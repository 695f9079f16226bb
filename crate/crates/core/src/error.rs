use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (illegal link/channel
    /// geometry, out-of-range ids, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("enumeration budget exceeded: estimated {estimated} assignments, budget is {budget}")]
    BudgetExceeded { estimated: u128, budget: u64 },

    #[error("dynamic program exceeded its state budget of {budget} memo entries")]
    StateBudgetExceeded { budget: usize },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
