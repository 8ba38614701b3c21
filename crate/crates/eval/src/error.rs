use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty text given to the precision metric")]
    EmptyText,
    #[error("precision is undefined: an embedding has zero norm")]
    UndefinedScore,
    #[error("embedding failed: {0}")]
    Embedding(#[from] hems_gateway::GatewayError),
    #[error("invalid grid: {0}")]
    Config(String),
    #[error("no trial results to aggregate")]
    NoResults,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
