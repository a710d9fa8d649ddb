use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Distribution parameters outside their admissible range.
    InvalidParams(&'static str),
    /// A bound or identity evaluated outside the hypotheses it is proven under.
    Domain {
        op: &'static str,
        requirement: &'static str,
    },
    /// Malformed or empty verification grid configuration.
    Config(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, requirement: &'static str) -> Self {
        Error::Domain { op, requirement }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::Domain { op, requirement } => {
                write!(f, "{op}: out of domain (requires {requirement})")
            }
            Error::Config(msg) => write!(f, "grid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
