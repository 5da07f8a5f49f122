use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("trace is empty")]
    EmptyTrace,

    #[error("trace contains a non-finite value at index {index}")]
    NonFiniteTrace { index: usize },

    #[error("trace has zero variance; autocorrelations are undefined")]
    DegenerateTrace,

    #[error("max lag {max_lag} must be smaller than the trace length {n}")]
    LagTooLarge { max_lag: usize, n: usize },

    #[error("invalid bandwidth: {0}")]
    InvalidBandwidth(String),

    #[error("Newey-West plug-in is degenerate: |1 + 2 sum rho| = {denominator:e}")]
    DegeneratePlugIn { denominator: f64 },

    #[error("variance estimate is negative ({gamma2}); use a positive semidefinite kernel or a different bandwidth")]
    NegativeEstimate { gamma2: f64 },

    #[error("unknown kernel `{0}` (expected bartlett, parzen or power:q with q >= 1)")]
    UnknownKernel(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("initial point has zero target density")]
    ZeroDensityStart,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("GARCH moment condition fails: E[(beta + alpha Z^2)^{nu}] = {value} >= 1")]
    MomentConditionViolated { nu: u32, value: f64 },

    #[error("fourth moment of the GARCH process does not exist: {0}")]
    NoFourthMoment(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
