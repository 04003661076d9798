use thiserror::Error;

/// Errors produced by the kernel algebra, the discretizers and the netkat engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("index mismatch: expected {expected} entries, got {actual}")]
    IndexMismatch { expected: usize, actual: usize },

    #[error("absolute continuity violated at cell {cell}: reference mass is zero but value is {value}")]
    AbsoluteContinuityViolation { cell: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("tail mass {mass:e} outside [-{cutoff}, {cutoff}] exceeds tolerance {tolerance:e}")]
    TailMassTooLarge {
        mass: f64,
        cutoff: f64,
        tolerance: f64,
    },

    #[error("quadrature failure: row {row} sums to {sum} (deviation {deviation:e}); try a larger tail cutoff or more nodes")]
    QuadratureFailure {
        row: usize,
        sum: f64,
        deviation: f64,
    },

    #[error("parse error at {position}: expected one of {}", expected.join(", "))]
    Parse {
        position: usize,
        expected: Vec<String>,
    },

    #[error("program contains a Kleene star where a star-free program is required")]
    StarNotAllowed,

    #[error("state budget exceeded: reached {reached} states (budget {budget})")]
    StateBudgetExceeded { reached: usize, budget: usize },

    #[error("pair-chain budget exceeded: reached {reached} (state, union) pairs (budget {budget}); use Monte Carlo")]
    PairBudgetExceeded { reached: usize, budget: usize },

    #[error("transient mass {residual:e} did not drain within {iterations} iterations; use Monte Carlo")]
    TransientMassNotDrained { residual: f64, iterations: usize },

    #[error("unsupported program shape: {0}")]
    UnsupportedShape(String),

    #[error("linear solve failed: {0}")]
    Singular(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
