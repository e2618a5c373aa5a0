use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{what} = {value} is outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A model or run configuration violated an invariant. `field` is the
    /// dotted config path of the offending entry.
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("root not bracketed: {0}")]
    RootNotBracketed(String),

    #[error("root equation has {sign_changes} sign changes; the maximiser is not unique")]
    AmbiguousRoot { sign_changes: usize },

    #[error("non-finite state on path {path} at step {step} (t = {t}): x = {x}, y = {y}")]
    NonFinite {
        path: usize,
        step: usize,
        t: f64,
        x: f64,
        y: f64,
    },

    /// A grid oracle could not certify its answer (maximiser on the edge of a
    /// truncated grid).
    #[error("inconclusive oracle: {0}")]
    Inconclusive(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
