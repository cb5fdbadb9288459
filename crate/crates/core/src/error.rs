use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state space of {requested} amplitudes exceeds cap {cap}")]
    DimensionCap { requested: usize, cap: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("eigensolver did not converge (residual {residual:e})")]
    ConvergenceFailure { residual: f64 },
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("bond dimension must be {expected}, found {found}")]
    WrongBondDim { expected: usize, found: usize },
    #[error("parse error at `{field}`: {msg}")]
    Parse { field: String, msg: String },
    #[error("schema error at `{field}`: {msg}")]
    Schema { field: String, msg: String },
    #[error("measure {measure} cannot be applied to {member} ensemble members")]
    MeasureMismatch { measure: String, member: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no outcome with nonzero probability found after {0} attempts")]
    ZeroProbabilityStart(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
