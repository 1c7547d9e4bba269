use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid degree {0}: the tree degree must be at least 2")]
    InvalidDegree(usize),
    #[error("invalid vertex {vertex:?} for degree {degree}")]
    InvalidVertex { vertex: String, degree: usize },
    #[error("unknown generator symbol {0:?}")]
    UnknownSymbol(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid preset: {0}")]
    InvalidPreset(String),
    #[error("undecided: budget of {budget} exhausted")]
    Undecided { budget: u64 },
    #[error("element moves level-{level} vertex {vertex}")]
    NotInLevelStabilizer { level: usize, vertex: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("stage {stage} failed: {reason}")]
    StageFailure { stage: usize, reason: String },
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
