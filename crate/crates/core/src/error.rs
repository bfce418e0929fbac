use thiserror::Error;

pub type Result<T, E = LreError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LreError {
    #[error("qubit count {0} is outside the supported range 1..={max}", max = crate::pauli::MAX_QUBITS)]
    InvalidQubitCount(u32),

    #[error("{what} index {index} is out of range for {n} qubits")]
    IndexOutOfRange {
        what: &'static str,
        index: u64,
        n: u32,
    },

    #[error("vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("trace {trace} deviates from 1 by more than {tolerance:e}")]
    TraceMismatch { trace: f64, tolerance: f64 },

    #[error("matrix is not a physical state: {0}")]
    Unphysical(String),

    #[error("Hermitian eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("{0} requires n <= {1}, got n = {2}")]
    TooLarge(&'static str, u32, u32),

    #[error("invalid state descriptor `{0}`")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("record line {line}: {message}")]
    RecordParse { line: usize, message: String },

    #[error("state file: {0}")]
    StateFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LreError {
    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        match self {
            LreError::Io(_) => true,
            LreError::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}
