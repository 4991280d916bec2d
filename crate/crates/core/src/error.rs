use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("potential not admissible: {0}")]
    NotAdmissible(String),
    #[error("degenerate interval [{a}, {b}]")]
    DegenerateInterval { a: f64, b: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("kernel is singular at coincident points (x = {x}, t = {t})")]
    Singular { x: f64, t: f64 },
    #[error("gaussian integral diverges: {0}")]
    DivergentGaussian(String),
    #[error("pole of the transform at c = 1/2")]
    Pole,
    #[error("non-finite value at {0}")]
    NonFinite(String),
    #[error("tolerance {tol:e} unreachable by order {order}: best tail bound {best_tail:e}")]
    TruncationUnreachable { tol: f64, order: usize, best_tail: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported initial state: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
