use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("unknown gate name `{0}`")]
    UnknownGate(String),

    #[error("unknown gate set `{0}` (expected L, R, S3, all20 or fixed:<name>)")]
    UnknownGateSet(String),

    #[error("built-in gates do not form a coset transversal: {0}")]
    Transversal(String),

    #[error("invalid Pauli probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("invalid channel description: {0}")]
    ChannelSyntax(String),

    #[error("component cap {cap} exceeded ({count} components) at prefix `{prefix}`")]
    ComponentCap {
        prefix: String,
        count: usize,
        cap: usize,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("decoder belief vanished at index {index}")]
    DecodeFailure { index: usize },

    #[error("invalid code specification: {0}")]
    InvalidCodeSpec(String),

    #[error("chaining needs |info| >= |frozen|, got {info} < {frozen}")]
    ChainUndefined { info: usize, frozen: usize },

    #[error("cannot select {k} indices out of {n}")]
    SelectionTooLarge { k: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
