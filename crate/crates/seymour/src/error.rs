use thiserror::Error;

/// Errors surfaced by the library; each maps to a process exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An operation's stated precondition does not hold for the arguments.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The instance exceeds a certified-computation limit (e.g. exact
    /// median orders, completion enumeration).
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// An iteration budget ran out before an outcome was reached.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A property that is supposed to hold unconditionally failed.
    /// Signals a bug in this crate or a malformed certified value.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// A search that is believed to always succeed found nothing, or a
    /// conjectured property failed. The payload carries the instance.
    #[error("potential refutation: {0}")]
    Refutation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parse { .. } | Error::Precondition(_) => 1,
            Error::Capability(_) | Error::Resource(_) => 2,
            Error::InvariantViolation(_) => 3,
            Error::Refutation(_) => 4,
        }
    }
}
