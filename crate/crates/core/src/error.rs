use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("sink without loop: vertex `{0}` has no outgoing edge")]
    SinkWithoutLoop(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("invalid play: {0}")]
    InvalidPlay(String),
    #[error("invalid requirement: {0}")]
    InvalidRequirement(String),
    #[error("requirement is not satisfiable")]
    Unsatisfiable,
    #[error("malformed certificate: {0}")]
    Certificate(String),
    #[error("invalid reduced strategy: {0}")]
    Strategy(String),
    #[error("invalid arena: {0}")]
    InvalidArena(String),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid CNF: {0}")]
    Cnf(String),
    #[error("invalid Kripke structure: {0}")]
    Kripke(String),
    #[error("invalid threshold: {0}")]
    Threshold(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
