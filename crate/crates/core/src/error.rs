//! Error type shared by every module of the library.

use num_complex::Complex64;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Snapshot of a quadrature (or iteration) that ran out of refinement budget.
///
/// Carries the last two iterates verbatim so a caller can inspect how far the
/// scheme got; `rows`/`cols` describe the shape of both buffers (column
/// vectors are reported as `cols == 1`).
#[derive(Debug, Clone)]
pub struct ConvergenceFailure {
    pub rows: usize,
    pub cols: usize,
    /// Iterate from the final refinement level (row-major).
    pub last: Vec<Complex64>,
    /// Iterate from the level before it (row-major).
    pub previous: Vec<Complex64>,
    /// Relative distance between the two in the norm used for the check.
    pub distance: f64,
    /// Nodes per segment used at the final level.
    pub nodes: usize,
}

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// `-s` is (numerically) an eigenvalue, so `sI + A` has no inverse.
    #[error("singular resolvent: -s is numerically an eigenvalue (s = {s})")]
    SingularResolvent { s: Complex64 },

    /// A linear solve was attempted past the configured condition cap.
    #[error("ill-conditioned system: cond ~ {cond:.3e} exceeds cap {cap:.3e}")]
    IllConditioned { cond: f64, cap: f64 },

    /// The operator failed the positivity requirements.
    #[error("operator is not positive: {reason}")]
    NotPositive { reason: String },

    /// The eigenvalue iteration did not converge.
    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,

    /// The exponent lies outside the range the formula is stated for.
    #[error("alpha = {alpha} is invalid here: {detail}")]
    InvalidAlpha { alpha: f64, detail: String },

    /// Node doubling exhausted `max_doublings` without meeting `rel_tol`.
    #[error(
        "quadrature did not converge: relative change {:.3e} after {} nodes per segment",
        .0.distance,
        .0.nodes
    )]
    NotConverged(Box<ConvergenceFailure>),

    /// The requested integral fails its integrability conditions.
    #[error("divergent integral: {detail}")]
    DivergentIntegral { detail: String },

    /// Parameters violate a documented precondition.
    #[error("invalid parameters: {detail}")]
    InvalidParams { detail: String },

    /// Operands have incompatible shapes.
    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },

    /// Block entries do not commute within tolerance, so the block formulas
    /// are not applicable.
    #[error("non-commuting entries: max commutator norm {norm:.3e} exceeds tolerance {tol:.3e}")]
    NonCommuting { norm: f64, tol: f64 },

    /// The operator determinant expression of the block matrix is singular.
    #[error("operator determinant expression is singular")]
    SingularDeterminant,

    /// The adjugate expression produced a residual above tolerance; the
    /// formula's hypotheses do not hold for this input, and the result is
    /// rejected rather than silently returned.
    #[error("adjugate resolvent rejected: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    AdjugateFormulaFailed { residual: f64, tol: f64 },

    /// A difference of operators that must be inverted is singular.
    #[error("difference of operators is singular")]
    SingularDifference,

    /// An eigenvalue sits on (or hugs) the closed negative real axis where
    /// the principal power is not defined.
    #[error("eigenvalue {eig} is too close to the principal branch cut")]
    BranchCutViolation { eig: Complex64 },

    /// Neither the eigendecomposition nor the Schur recurrence could produce
    /// a trustworthy matrix function value.
    #[error("similarity too ill-conditioned for a matrix function (cond ~ {cond:.3e})")]
    IllConditionedSimilarity { cond: f64 },

    /// Relative error against a zero reference is undefined.
    #[error("reference matrix has zero norm")]
    ZeroReference,

    /// A time step produced a singular linear system.
    #[error("time step leads to a singular linear system")]
    SingularStep,

    /// A matrix-function evaluation failed inside the evolution driver.
    #[error("matrix-function evaluation failed during evolution: {detail}")]
    OracleFailure { detail: String },

    /// Underlying file-system failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Input text could not be parsed into the expected format.
    #[error("parse error: {detail}")]
    Parse { detail: String },
}

impl Error {
    /// Shorthand for [`Error::Parse`].
    pub fn parse(detail: impl Into<String>) -> Self {
        Error::Parse {
            detail: detail.into(),
        }
    }

    /// Shorthand for [`Error::InvalidParams`].
    pub fn params(detail: impl Into<String>) -> Self {
        Error::InvalidParams {
            detail: detail.into(),
        }
    }
}
