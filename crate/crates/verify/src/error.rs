use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not a density operator: {0}")]
    NotDensity(String),
    #[error("not a channel: {0}")]
    NotChannel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("lemma {lemma} violated: deviation {deviation:e} at {inputs}")]
    LemmaViolated { lemma: String, deviation: f64, inputs: String },
}

pub type Result<T> = std::result::Result<T, VerifyError>;
