use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid strategy {strategy} for player {player} (has {count} strategies)")]
    InvalidStrategy {
        player: usize,
        strategy: usize,
        count: usize,
    },

    #[error("budget exceeded: operation needs {required} cells, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("invalid mixed profile: {0}")]
    InvalidMixed(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("Lipschitz bound violated: |F({a}) - F({b})| = {diff} > {bound}")]
    LipschitzViolation {
        a: String,
        b: String,
        diff: f64,
        bound: f64,
    },

    #[error("exhausted {attempts} attempts without finding a verified matrix")]
    ExhaustedAttempts { attempts: u64 },

    #[error("no pure eps-equilibrium found: {0}")]
    NoEquilibriumFound(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
