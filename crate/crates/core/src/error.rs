use alloc::string::String;

/// Error categories shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    Input(String),
    /// The operation is not available for this distribution, model or function.
    #[error("unsupported: {0}")]
    Capability(String),
    /// A model violates one of its construction invariants.
    #[error("model error: {0}")]
    Model(String),
    /// A sequence failed validation; `index` is 1-based.
    #[error("validation failed at n = {index}: {reason}")]
    Validation { index: usize, reason: String },
    /// A generator could not build the requested object.
    #[error("construction error: {0}")]
    Construction(String),
}

pub type Result<T> = core::result::Result<T, Error>;
