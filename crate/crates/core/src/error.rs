use thiserror::Error;

/// Errors raised by grid construction, the PDE model, the solver and the
/// geometry routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported grid: dimension {n} with mode {mode}")]
    UnsupportedGrid { n: usize, mode: String },
    #[error("resolution {got} too small (minimum {min})")]
    ResolutionTooSmall { got: usize, min: usize },
    #[error("field length {got} does not match grid node count {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("{what} must be positive; found {value} at node {node}")]
    NonPositive {
        what: &'static str,
        value: f64,
        node: usize,
    },
    #[error("index {k} out of range 0..={max}")]
    OutOfRange { k: usize, max: usize },
    #[error("homotopy parameter t = {0} outside [0, 1]")]
    HomotopyParameter(f64),
    #[error("support function has min value {min_phi} <= 1; the closed-form family requires phi > 1")]
    NotAboveOne { min_phi: f64 },
    #[error("field is not even: max antipodal deviation {deviation:e}")]
    NotEven { deviation: f64 },
    #[error("U[phi] is not positive definite: min eigenvalue {min_eig:e} at node {node} (theta = {theta}, lambda = {lambda})")]
    NotHConvex {
        min_eig: f64,
        node: usize,
        theta: f64,
        lambda: f64,
    },
    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("trust constraints violated after {backtracks} backtracks (residual {residual:e})")]
    TrustRegion { backtracks: usize, residual: f64 },
    #[error("linear solver stagnated after {iterations} iterations (relative residual {relative:e})")]
    LinearStagnation { iterations: usize, relative: f64 },
    #[error("continuation stalled at t = {t} (step {step:e} below minimum)")]
    ContinuationStall { t: f64, step: f64 },
    #[error("prescribed data is not admissible: {0}")]
    Inadmissible(String),
    #[error("Nirenberg correspondence requires n >= 3 (got {0})")]
    NirenbergDimension(usize),
    #[error("expression error at column {column}: {message}")]
    Expression { column: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
