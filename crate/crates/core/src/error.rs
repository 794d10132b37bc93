use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("operation requires an all-qubit layout, `{label}` has dimension {dim}")]
    NotQubit { label: String, dim: usize },

    #[error("Pauli string has {got} symbols, layout has {expected} subsystems")]
    PauliLength { expected: usize, got: usize },

    #[error("invalid Pauli symbol `{0}`")]
    PauliSymbol(char),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix side {got} does not match layout dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("total dimension {0} exceeds the dense limit")]
    TooLarge(usize),

    #[error("scenario mismatch: {0}")]
    Scenario(String),

    #[error("malformed conic program: {0}")]
    Program(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("unsupported Pauli pair `{0}`")]
    UnsupportedPair(String),

    #[error("invalid instrument: {0}")]
    Instrument(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
