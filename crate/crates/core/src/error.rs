use thiserror::Error;

/// Errors raised by the numeric, channel, simulation and tomography routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace {0} is not 1")]
    InvalidTrace(f64),

    #[error("Kraus operators are not complete (deviation {deviation:e})")]
    NotComplete { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported conversion: {0}")]
    Unsupported(String),

    #[error("measurement design is not informationally complete")]
    NotInformationallyComplete,

    #[error("dataset contains no counts")]
    ZeroCounts,

    #[error("unknown setting label `{0}`")]
    UnknownSetting(String),

    #[error("waveplate solver failed (infidelity {infidelity:e})")]
    SolverFailed { infidelity: f64 },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
