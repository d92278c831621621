use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the toolkit can report.
///
/// Variants are grouped by [`ErrorClass`], which the command-line front end
/// turns into a process exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },

    #[error("invalid matrix shape: {0}")]
    InvalidShape(String),

    #[error("column {0} is constant; pass allow_constant to center it without scaling")]
    ConstantColumn(usize),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("every feature weight is zero")]
    AllZeroWeights,

    #[error("invalid feature weights: {0}")]
    InvalidWeights(String),

    #[error("cannot seed {k} centroids from {n} rows")]
    DegenerateData { k: usize, n: usize },

    #[error("sparsity parameter s = {s} is outside the valid range [{min}, {max}]")]
    SparsityOutOfRange { s: f64, min: f64, max: f64 },

    #[error("every between-cluster sum of squares is non-positive")]
    AllNonPositiveBcss,

    #[error("objective is non-positive for every candidate sparsity level")]
    NonPositiveObjective,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid mixture spec: {0}")]
    InvalidSpec(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("cannot open {}: {source}", path.display())]
    Open {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse error classes used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 1,
            ErrorClass::Data => 2,
            ErrorClass::Numerical => 3,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::SparsityOutOfRange { .. }
            | Error::UnknownExperiment(_)
            | Error::InvalidConfig(_) => ErrorClass::Usage,
            Error::EmptyCluster(_)
            | Error::AllZeroWeights
            | Error::DegenerateData { .. }
            | Error::AllNonPositiveBcss
            | Error::NonPositiveObjective => ErrorClass::Numerical,
            Error::NonFiniteInput { .. }
            | Error::InvalidShape(_)
            | Error::ConstantColumn(_)
            | Error::InvalidPartition(_)
            | Error::InvalidWeights(_)
            | Error::LengthMismatch(_)
            | Error::IndexOutOfRange { .. }
            | Error::InvalidSpec(_)
            | Error::Parse { .. }
            | Error::Open { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => ErrorClass::Data,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }
}
