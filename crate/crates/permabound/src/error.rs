use thiserror::Error;

/// Error variants shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix rows of unequal length, or an empty matrix.
    #[error("ragged or empty matrix: {0}")]
    RaggedRows(String),

    /// An entry below the ingestion tolerance `-1e-9`.
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    /// Entry outside `[0, 1]` where a (sub-)stochastic matrix is required.
    #[error("entry {value} at ({row}, {col}) outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    /// Incompatible dimensions for a constructor or operation.
    #[error("bad dimensions: {0}")]
    BadDimensions(String),

    /// A family indexed by even n was asked for an odd n.
    #[error("dimension must be even, got {0}")]
    OddN(usize),

    /// The support admits no perfect matching, so the permanent is zero.
    #[error("support admits no perfect matching (max matching {max_matching} < {n})")]
    NoPerfectMatching { max_matching: usize, n: usize },

    /// Same condition surfaced from an optimizer that requires per > 0.
    #[error("zero permanent: support admits no perfect matching")]
    ZeroPermanent,

    /// An iteration ran out of budget before reaching its tolerance.
    #[error("{what} did not converge within {max_iter} iterations (residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        max_iter: usize,
        residual: f64,
    },

    /// Input too large for an exact algorithm.
    #[error("{what}: n = {n} exceeds the exact-computation cap {cap}")]
    TooLarge {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    /// Gradient requested at a point where it is unbounded.
    #[error("gradient unbounded: entry ({row}, {col}) is at the boundary ({value})")]
    BoundaryPoint { row: usize, col: usize, value: f64 },

    /// No permutation avoids all forbidden cells.
    #[error("assignment infeasible: no permutation avoids the forbidden cells")]
    Infeasible,

    /// Capacity infimum is 0 (log diverges), e.g. a needed column is zero.
    #[error("capacity unbounded below in log domain: {0}")]
    Unbounded(String),

    /// Enumeration would exceed the caller's cap.
    #[error("enumeration exceeds cap of {cap} matrices")]
    CapExceeded { cap: usize },

    /// Rejection sampler ran out of budget.
    #[error("rejection sampling exceeded budget of {budget} draws")]
    RejectionBudgetExceeded { budget: usize },

    /// A 0/1 matrix was required.
    #[error("entry {value} at ({row}, {col}) is not boolean")]
    NotBoolean { row: usize, col: usize, value: f64 },

    /// Argument outside the stated domain of a closed-form function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
