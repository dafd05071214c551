use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is empty")]
    Empty,

    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("asymmetry at ({row}, {col}): {upper} vs {lower} exceeds tolerance {tol:e}")]
    Asymmetric {
        row: usize,
        col: usize,
        upper: f64,
        lower: f64,
        tol: f64,
    },

    #[error("nonzero diagonal at ({index}, {index}): {value} exceeds tolerance {tol:e}")]
    NonZeroDiagonal { index: usize, value: f64, tol: f64 },

    #[error("eigensolver did not converge on a {n}x{n} matrix")]
    EigenNonConvergence { n: usize },

    #[error("Gram matrix has eigenvalue {eigenvalue} below -{bound:e}; input is not a squared Euclidean distance matrix")]
    NotEuclidean { eigenvalue: f64, bound: f64 },

    #[error("index ({i}, {j}) out of range for {n} points")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("distortion factor is undefined for point {0} paired with itself")]
    SamePoint(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shape mismatch: expected {expected}x{expected}, found {rows}x{cols}")]
    ShapeMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("edge list contains no edges")]
    EmptyGraph,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical routines rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNonConvergence { .. } | Error::NotEuclidean { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
