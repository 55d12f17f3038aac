use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("window of {width} sites exceeded the configured maximum of {max} after {retries} retries")]
    WindowExhausted { width: u64, max: u64, retries: u32 },
    #[error("incompatible configurations: {0}")]
    Incompatible(String),
    #[error("painleve integration diverged at x = {x}: {reason}")]
    Diverged { x: f64, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
