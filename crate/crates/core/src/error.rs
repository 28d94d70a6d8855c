use thiserror::Error;

/// Errors raised by library operations.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("invalid arena: {0}")]
    InvalidArena(String),
    #[error("invalid play: {0}")]
    InvalidPlay(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, GameError>;
