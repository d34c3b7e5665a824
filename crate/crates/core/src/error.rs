use thiserror::Error;

pub type Result<T, E = QfiError> = std::result::Result<T, E>;

/// Failures raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QfiError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error(
        "operator is not Hermitian: max |A_ij - conj(A_ji)| = {deviation:e} exceeds {tolerance:e}"
    )]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("operator is not unitary: max |UU^dagger - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix (residual {residual:e})")]
    EigenNonConvergence { dim: usize, residual: f64 },

    #[error(
        "matrix exponential overflows (largest exponent {max_exponent:.3}); \
         use the log-domain Gibbs path for large inverse temperatures"
    )]
    ExpOverflow { max_exponent: f64 },

    #[error("density operator has trace {trace}, expected 1")]
    NotNormalized { trace: f64 },

    #[error("probability {value:e} at index {index} is negative")]
    NegativeProbability { index: usize, value: f64 },

    #[error("spin must have twice_j >= 1, got {twice_j}")]
    InvalidSpin { twice_j: u32 },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("Hamiltonian is fully degenerate; the minimum non-zero gap is undefined")]
    FullyDegenerate,

    #[error("operation not supported for {0} encodings")]
    UnsupportedEncoding(&'static str),
}

impl QfiError {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        QfiError::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
