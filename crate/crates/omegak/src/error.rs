use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands have incompatible shapes or ambient dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Input violates a mathematical precondition (not unitary, not
    /// skew-Hermitian, not dominant, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A Grassmannian window is too small to hold the requested data.
    #[error("window error: {0}")]
    Window(String),
}

pub type Result<T> = std::result::Result<T, Error>;
