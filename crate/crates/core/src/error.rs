use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value space mismatch: expected {expected}, found {found}")]
    SpaceMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("time {time} is not a lattice time at scale {scale}")]
    NotOnLattice { scale: u32, time: String },

    #[error("regularization table has no entry for tail prefix {prefix}")]
    RegTableIncomplete { prefix: String },

    #[error("fractional time needs scale {needed} but regularization level is {level}")]
    ScaleBeyondLevel { needed: u32, level: u32 },

    #[error("operation is not supported for this model: {0}")]
    Unsupported(String),

    #[error("nothing to report: {0}")]
    Empty(String),

    #[error("{0} is out of range")]
    OutOfRange(String),
}
