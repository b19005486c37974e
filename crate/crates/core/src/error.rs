use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid label {label} at example {index}: {requirement}")]
    InvalidLabel {
        index: usize,
        label: f64,
        requirement: &'static str,
    },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("non-finite value computed in {0}")]
    NonFinite(&'static str),

    #[error("constant {constant} needs a domain radius (sup over ||w||_inf <= R)")]
    MissingDomainRadius { constant: &'static str },

    #[error("iterate became non-finite at t = {t}")]
    Diverged { t: usize },

    #[error("averaged iterate needs every iterate recorded, got stride {stride}")]
    StrideTooCoarse { stride: usize },

    #[error("missing input `{0}`")]
    MissingInput(&'static str),

    #[error("{member} run of the pair failed: {source}")]
    PairMember {
        member: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("replicate {replicate} failed: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
