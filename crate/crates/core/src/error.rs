use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("network reduction failed at cell ({row}, {col}): reduced capacitance {value:e} F is not positive")]
    ReductionFailure { row: usize, col: usize, value: f64 },
    #[error("oracle failure: {0}")]
    OracleFailure(String),
    #[error("problem too large: {what} is {got}, limit {limit}")]
    Scale { what: &'static str, got: usize, limit: usize },
    #[error("tunneling barrier is not sub-barrier: E_F' = {fermi_ev} eV >= V_ox = {barrier_ev} eV")]
    OverBarrier { fermi_ev: f64, barrier_ev: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("lattice {rows}x{cols} too small for K_{n}; requires at least {need}x{need}")]
    Capacity { n: usize, rows: usize, cols: usize, need: usize },
    #[error("embedding incomplete: {0}")]
    EmbeddingIncomplete(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

impl Error {
    /// Short machine-readable tag, used by the command-line error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "invalid_geometry",
            Error::InvalidLattice(_) => "invalid_lattice",
            Error::ReductionFailure { .. } => "reduction_failure",
            Error::OracleFailure(_) => "oracle_failure",
            Error::Scale { .. } => "scale",
            Error::OverBarrier { .. } => "over_barrier",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::Capacity { .. } => "capacity",
            Error::EmbeddingIncomplete(_) => "embedding_incomplete",
            Error::InvalidSchedule(_) => "invalid_schedule",
        }
    }
}
