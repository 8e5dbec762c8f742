use thiserror::Error;

/// Errors raised by the trace, automata and rewriting layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet error: {0}")]
    Alphabet(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("resource budget exceeded: {what} (limit {limit})")]
    Resource { what: String, limit: usize },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("reachability relation not automatic for this system")]
    ReachabilityNotAutomatic,
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Alphabet(_) => "alphabet",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::DomainMismatch(_) => "domain-mismatch",
            Error::Invariant(_) => "invariant",
            Error::Resource { .. } => "resource",
            Error::UnknownLabel(_) => "unknown-label",
            Error::ReachabilityNotAutomatic => "reachability-not-automatic",
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) | Error::Alphabet(_) | Error::UnknownLabel(_) => 1,
            Error::Resource { .. } => 3,
            Error::DomainMismatch(_) | Error::Invariant(_) | Error::ReachabilityNotAutomatic => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
