/// Errors shared by every layer of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Zero generates the zero module, which is not an ideal we track.
    #[error("zero is not a valid ideal generator")]
    ZeroIdeal,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A declared precondition on function values was violated; the message
    /// names the witness.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The requested accuracy is unreachable with the given truncation.
    #[error("precision: {0}")]
    Precision(String),

    /// Quadrature or another numerical routine failed to converge.
    #[error("numeric: {0}")]
    Numeric(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("missing calibration entry for tag `{0}`")]
    MissingCalibration(String),

    #[error("calibration entry `{tag}` was produced by a different parameter lattice (hash {found:#018x}, expected {expected:#018x})")]
    CalibrationMismatch {
        tag: String,
        found: u64,
        expected: u64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
