use thiserror::Error;

/// Errors raised by sketch construction, updates and queries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("value {value} outside accepted range [{min}, {max}]")]
    OutOfRange { value: i64, min: i64, max: i64 },

    #[error("slack offset {offset} outside [0, {block_size})")]
    SlackOutOfRange { offset: u64, block_size: u64 },

    #[error("query on an empty stream")]
    Empty,

    #[error("standard deviation is undefined over a window of {0} element(s)")]
    UndefinedStdDev(u64),

    #[error("granule mismatch between fixed-point operands")]
    GranuleMismatch,

    #[error("arithmetic overflow")]
    Overflow,
}

pub type Result<T> = std::result::Result<T, Error>;
