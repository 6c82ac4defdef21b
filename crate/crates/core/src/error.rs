use thiserror::Error;

pub type Result<T, E = MediationError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MediationError {
    /// Column, layout or arity mismatch between inputs.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{context} linear predictor {value} is outside the representable exp() range")]
    Overflow { context: &'static str, value: f64 },

    #[error("non-finite value at index {index} in {context}")]
    NonFinite { context: &'static str, index: usize },

    #[error("logistic fit did not converge after {iterations} iterations; max |score| per iteration: {trace:?}")]
    NonConvergence { iterations: usize, trace: Vec<f64> },

    #[error("quasi-complete separation: coefficient '{column}' reached {value} with the likelihood still increasing")]
    Separation { column: String, value: f64 },

    #[error("singular design: column '{column}' is collinear with {collinear_with:?}")]
    Singular { column: String, collinear_with: Vec<String> },

    #[error("degenerate probability {value} for {context}")]
    DegenerateProbability { context: String, value: f64 },

    #[error("negative variance {value} for {effect}")]
    NegativeVariance { effect: String, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
