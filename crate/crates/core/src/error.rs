use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("lattice error: {0}")]
    Lattice(String),
    #[error("not a frame: {0}")]
    NotAFrame(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
