use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("instance has {n} vertices, exhaustive search supports at most {max}")]
    SizeLimit { n: usize, max: usize },

    #[error("trace does not match graph: {0}")]
    Inconsistent(String),

    #[error("mistake ({x}, {z}) in iteration {iteration} matched {matched:?} types, expected exactly one")]
    ClassificationViolation { iteration: usize, x: usize, z: usize, matched: Vec<u8> },
}

pub type Result<T> = std::result::Result<T, Error>;
