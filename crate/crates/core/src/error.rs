use thiserror::Error;

/// Errors raised by the geometry engine.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected rank {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("rank {0} is outside the supported range 1..={max}", max = crate::linalg::MAX_RANK)]
    Rank(usize),

    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error(
        "Hermitian eigensolver did not converge after {iterations} sweeps (Frobenius norm {norm:e})"
    )]
    NoConvergence { norm: f64, iterations: usize },

    #[error("matrix exponential overflow: eigenvalue magnitude {magnitude:e} above guard {guard}")]
    Overflow { magnitude: f64, guard: f64 },

    #[error("ill-conditioned matrix: condition number {condition:e} above guard {guard:e}")]
    IllConditioned { condition: f64, guard: f64 },

    #[error("alpha = {alpha} is not admissible for rank {rank}: need alpha > {bound}", bound = -1.0 / *rank as f64)]
    InvalidAlpha { alpha: f64, rank: usize },

    #[error("tangent vectors span a degenerate plane")]
    DegeneratePlane,

    #[error("distance oracle failed: {0}")]
    OracleFailure(String),

    #[error("quadrature meshes differ (hash {left:016x} vs {right:016x})")]
    MeshMismatch { left: u64, right: u64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("at point {id}: {source}")]
    AtPoint {
        id: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("alpha must be constant over the mesh for conformal formulas (found {min} .. {max})")]
    NonConstantAlpha { min: f64, max: f64 },

    #[error("degenerate value at point {id} which carries positive weight")]
    MeasureInconsistency { id: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn at(self, id: u64) -> Self {
        match self {
            e @ Error::AtPoint { .. } => e,
            e => Error::AtPoint {
                id,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
