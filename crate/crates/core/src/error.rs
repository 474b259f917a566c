use thiserror::Error;

/// Errors raised by the toolkit. Numeric payloads are reported as `f64`
/// regardless of the scalar type of the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite: leading minor {minor} is non-positive")]
    NotPositiveDefinite { minor: usize },

    #[error("degenerate plane: |u|^2 |v|^2 - <u,v>^2 = {0:e}")]
    DegeneratePlane(f64),

    #[error("basis is not orthonormal (max Gram deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("matrix is not orthogonal (max deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("symmetry violation at triple ({a},{b},{c}): {first} vs {second}")]
    SymmetryViolation {
        a: usize,
        b: usize,
        c: usize,
        first: f64,
        second: f64,
    },

    #[error("invalid tuple {parts:?} for n = {n}: {reason}")]
    InvalidTuple {
        n: usize,
        parts: Vec<usize>,
        reason: String,
    },

    #[error("variant {variant} is not admissible here: {reason}")]
    Inadmissible { variant: String, reason: String },

    #[error("no improved inequality applies when N = n (only the general inequality holds)")]
    NoImprovedVariant,

    #[error("no equality pattern is known for variant {0}")]
    NoEqualityPattern(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("horizontality violated: residual {0:e}")]
    NotHorizontal(f64),

    #[error("degenerate induced metric: min eigenvalue {0:e}")]
    DegenerateMetric(f64),

    #[error("finite-difference step underflow: {0:e}")]
    StepUnderflow(f64),

    #[error("cost guard: {0}")]
    CostGuard(String),

    #[error("unknown example '{0}'")]
    UnknownExample(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
