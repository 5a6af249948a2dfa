use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("polynomial root residual {residual:e} exceeds tolerance {tolerance:e}")]
    RootFindingFailure { residual: f64, tolerance: f64 },

    #[error("Newton iteration did not converge from seed {seed} ({reason})")]
    NewtonDivergence { seed: Complex64, reason: String },

    #[error("argument-principle count mismatch in {region}: expected {expected}, found {found}")]
    RootCountMismatch {
        region: String,
        expected: usize,
        found: usize,
    },

    #[error("spectrum holds {available} shells but {required} are required")]
    InsufficientShells { available: usize, required: usize },

    #[error("|phi_{edge}(pi, mu)| = {value:e} is below the guard {guard:e} at node {node}")]
    SmallDenominator {
        edge: usize,
        node: usize,
        value: f64,
        guard: f64,
    },

    #[error("degenerate split failed: {0}")]
    SplitFailure(String),

    #[error("shell {shell} received {received} entries, expected {expected}")]
    ShellOverflow {
        shell: usize,
        received: usize,
        expected: usize,
    },

    #[error("multiset of {len} values is not a whole number of shells of {m}")]
    IncompleteShells { len: usize, m: usize },

    #[error("ambiguous case detection at lambda = {lambda}: |phi_{edge}(pi, lambda)| = {value:e}")]
    CaseDetectionAmbiguous {
        lambda: Complex64,
        edge: usize,
        value: f64,
    },

    #[error("h configuration does not satisfy the requirement: {0}")]
    Inadmissible(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Validation failures map to exit code 2, numerical failures to 3.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Inadmissible(_)
                | Error::InvalidInput(_)
                | Error::Schema(_)
                | Error::Json(_)
                | Error::Io(_)
                | Error::OrderTooHigh { .. }
                | Error::IncompleteShells { .. }
        )
    }
}
