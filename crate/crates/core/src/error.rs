use thiserror::Error;

/// Every fallible operation in the crate reports through this type.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated an operation's pre-condition (mismatched spaces, bad ranges).
    #[error("usage error: {0}")]
    Usage(String),

    /// A scenario, family or stratification cannot be realised as configured.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("construction failed in annulus {annulus}: {reason}")]
    Construction { annulus: String, reason: String },

    #[error("population {required} exceeds the configured cap {cap}; raise the cap to at least {required}")]
    PopulationCap { required: usize, cap: usize },

    #[error("explicit radius schedule of center {index} exhausted: maximum n is {max_n}")]
    Range { index: usize, max_n: usize },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
