use thiserror::Error;

/// Errors raised by measure computations, ingestion and the oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("prediction {0} outside [0, 1]")]
    PredictionOutOfRange(f64),

    #[error("label {0} is not 0 or 1")]
    InvalidLabel(f64),

    #[error("invalid weight {0}")]
    InvalidWeight(f64),

    #[error("all weights are zero")]
    ZeroTotalWeight,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight function value {value} at {at} outside [-1, 1]")]
    WeightOutOfRange { at: f64, value: f64 },

    #[error("kernel Gram matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("policy has no action for prediction {0}")]
    PolicyUndefined(f64),

    #[error("oracle size cap exceeded: {size} > {cap}")]
    OracleCapExceeded { size: usize, cap: usize },

    #[error("strategy emitted out-of-range value {0}")]
    StrategyOutOfRange(f64),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),

    #[error("linear program is {0}")]
    LinearProgram(&'static str),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownMeasure(_) => 3,
            Error::OracleCapExceeded { .. } => 4,
            Error::LinearProgram(_) => 1,
            _ => 2,
        }
    }
}
