use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("valuation undefined for zero")]
    ZeroValuation,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("mismatched primes: {0} and {1}")]
    PrimeMismatch(u64, u64),

    #[error("map restricted to p-adic integers (valuation {0})")]
    NotIntegral(i64),

    #[error("support primes incomplete: missing {0}")]
    SupportIncomplete(u64),

    #[error("phase point exceeds truncation")]
    PhaseOutOfWindow,

    #[error("adele point has no component at {0} but the test function needs one")]
    MissingComponent(u64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code for the CLI: 2 for bad data, 3 for numerical failures.
    /// Usage errors (1) are produced by argument parsing before any `Error` exists.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}
