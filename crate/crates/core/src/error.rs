use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is numerically singular (max pivot {pivot:e})")]
    Singular { pivot: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    Asymmetric { asymmetry: f64 },

    #[error("degenerate problem: delta_x = {delta_x}, delta_y = {delta_y}; no linear rate is possible")]
    DegenerateProblem { delta_x: f64, delta_y: f64 },

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("oracle is not quadratic: {0}")]
    NonQuadratic(String),

    #[error("infeasible point: P-distance {distance} from center exceeds radius {radius}")]
    Infeasible { distance: f64, radius: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error in field `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dims(expected: usize, got: usize) -> Self {
        Error::DimensionMismatch { expected, got }
    }
}
