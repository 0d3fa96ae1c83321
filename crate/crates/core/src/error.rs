use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument that must be finite was NaN or infinite.
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `compose` was called with no operators.
    #[error("empty operator sequence")]
    EmptySequence,

    /// A path state failed the normalization check.
    #[error("state is not normalized: |a_I|^2 + |a_II|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    /// A probability density did not sum to one.
    #[error("density is not normalized: total weight = {total}")]
    UnnormalizedDensity { total: f64 },

    /// The operation is not defined for the given profile or mode.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A tabulated profile was queried outside its grid.
    #[error("query out of tabulated range: {0}")]
    OutOfRange(String),

    /// Adaptive quadrature hit its subdivision ceiling before reaching the
    /// requested tolerance.
    #[error(
        "quadrature did not converge: requested abs tol {requested:.3e}, \
         achieved {achieved:.3e} with {intervals} intervals"
    )]
    QuadratureNonConvergence {
        requested: f64,
        achieved: f64,
        intervals: usize,
    },

    /// Contrast of an identically zero curve.
    #[error("contrast undefined: intensity curve is identically zero")]
    UndefinedContrast,
}

pub type Result<T> = std::result::Result<T, Error>;
