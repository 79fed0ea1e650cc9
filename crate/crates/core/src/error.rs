use thiserror::Error;

/// Errors produced anywhere in the engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("index {index} out of range for {what} (size {size})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("{what}: size {size} exceeds configured cap {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("malformed report: {0}")]
    MalformedReport(String),

    #[error("malformed random bits: {0}")]
    MalformedBits(String),

    #[error("friendship graph has degree {0}; this operation requires degree at most 1")]
    FriendshipDegree(usize),

    #[error("mechanism {mechanism} does not support {what}")]
    Unsupported {
        mechanism: &'static str,
        what: &'static str,
    },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),

    #[error("invalid rainbow instance: {0}")]
    InvalidRainbow(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
