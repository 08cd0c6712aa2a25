//! Crate-wide error type and the process exit-code taxonomy used by the CLI.

use thiserror::Error;

/// Unified error type for every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is out of range or structurally wrong
    /// (bad dimensions, non-unitary input, parameter-vector length mismatch, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A requested object would exceed the supported system size (dim > 32).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Configuration file problems: unreadable, malformed JSON, missing or
    /// unknown fields, values out of range.
    #[error("config error: {0}")]
    Config(String),

    /// The channel restricted to the code space is numerically degenerate
    /// (E(P) has no support), so no recovery can be built.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// A numerical routine failed to converge or produced non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// An internal cross-check failed: quantities that must agree by
    /// construction (unitality of the effective process, oracle gaps,
    /// re-derived optima, circuit verification) drifted beyond tolerance.
    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),

    /// Circuit synthesis was asked for a label combination it does not support.
    #[error("unsupported Pauli string: {0}")]
    UnsupportedString(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    ///
    /// 0 is success; 2 means the input or configuration was unusable; 3 means
    /// a numerical routine failed; 4 means an internal consistency check
    /// (oracle gap, circuit verification) failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::Capacity(_)
            | Error::Config(_)
            | Error::UnsupportedString(_) => 2,
            Error::DegenerateChannel(_) | Error::Numeric(_) | Error::Io(_) | Error::Json(_) => 3,
            Error::Inconsistency(_) => 4,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
