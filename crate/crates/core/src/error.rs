use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown generator g{factor}.{index}")]
    UnknownGenerator { factor: usize, index: usize },

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("{what} exceeded cap of {cap}")]
    CapExceeded { what: String, cap: usize },

    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("invalid match: {0}")]
    InvalidMatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("group axiom violated: {0}")]
    GroupAxiom(String),

    #[error("norm axiom violated: {0}")]
    NormAxiom(String),

    #[error("kernel is not a normal subgroup: {0}")]
    NotNormal(String),

    #[error("certificate failure: {0}")]
    Certificate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn cap(what: impl Into<String>, cap: usize) -> Self {
        Error::CapExceeded { what: what.into(), cap }
    }

    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

/// Resource limits for the combinatorial searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of distinct group elements a single search may touch.
    pub ball: usize,
    /// Maximum number of matches enumerated for one word.
    pub matches: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { ball: 1_000_000, matches: 100_000 }
    }
}
