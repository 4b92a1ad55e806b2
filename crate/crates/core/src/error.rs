use thiserror::Error;

/// Errors raised by problem oracles, solvers, and the benchmark builders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid oracle: {0}")]
    InvalidOracle(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("line search exceeded {max_backtracks} backtracks (last trial L = {last_l:e})")]
    LineSearchExhausted { max_backtracks: usize, last_l: f64 },

    #[error("degenerate weight update: L = {l:e} must exceed mu_f = {mu_f:e}")]
    DegenerateWeight { l: f64, mu_f: f64 },

    #[error("degenerate extrapolation: q = 1 means the problem is solvable in one step")]
    DegenerateExtrapolation,

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("no cost tabulated for {method} / {event}")]
    UnknownCost { method: String, event: String },

    #[error("a Lipschitz constant hint is required by {0}")]
    MissingLipschitz(String),

    #[error("step schedule exhausted after {0} iterations")]
    ScheduleExhausted(usize),

    #[error("trace lacks vertex data at k = {0}")]
    MissingVertexData(usize),

    #[error("image format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
