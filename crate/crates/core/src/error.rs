use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge (estimate {value:e}, error {abs_err:e})")]
    NonConvergence { value: f64, abs_err: f64 },
    #[error("integrand produced a non-finite value")]
    NonFinite,
    #[error("invalid integration range")]
    BadRange,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid law parameter: {0}")]
    InvalidLaw(String),
    #[error("law spec parse error at column {column}: {message} (near `{token}`)")]
    LawSyntax { column: usize, token: String, message: String },
    #[error("law has infinite mean")]
    InfiniteMean,
    #[error("operation not applicable to this law: {0}")]
    NotApplicable(&'static str),
    #[error("tail vanishes at x = {0}")]
    ZeroTail(f64),
    #[error("probability argument {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("interval ({0}, {1}] is reversed")]
    ReversedInterval(f64, f64),
    #[error("index range [{lo}, {hi}] invalid for a path of length {len}")]
    IndexOutOfRange { lo: usize, hi: usize, len: usize },
    #[error("heavy-tailed law: exponential moments are infinite, kappa undefined")]
    HeavyTailed,
    #[error("law is not subcritical (E xi = {0})")]
    NotSubcritical(f64),
    #[error("walk exceeded step cap of {0} elementary steps")]
    StepCapExceeded(u64),
    #[error("degenerate importance proposal: tail vanishes at threshold {0}")]
    DegenerateProposal(f64),
    #[error("no replication hit the conditioning event")]
    NoHits,
    #[error("truncation bound {bound:e} not reached within {iterations} terms")]
    Truncation { bound: f64, iterations: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error at line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("malformed input at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
