use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied a value outside an operation's domain.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The objective is undefined, e.g. the cyclic antibandwidth of an edgeless graph.
    #[error("undefined objective: {0}")]
    UndefinedObjective(String),

    #[error("unknown instance `{0}` in bounds table")]
    Lookup(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("graph has {n} vertices, brute force is capped at {cap}; use the SAT solver instead")]
    OracleCap { n: usize, cap: usize },

    #[error("solver backend failure: {0}")]
    Backend(String),

    /// An internal invariant was broken. Indicates a bug in an encoder or the search.
    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }
}
