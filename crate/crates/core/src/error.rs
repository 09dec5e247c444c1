use thiserror::Error;

/// Errors raised while building or evaluating the approximation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("net capacity exceeded: {requested} points needed, cap is {cap}")]
    Capacity { requested: u64, cap: usize },

    #[error("polynomial is not separating: sampled sphere infimum {infimum:e}")]
    NotSeparating { infimum: f64 },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("gauge is undefined on the zero vector")]
    ZeroVector,

    #[error("root bracket [{lo}, {hi}] does not straddle the level set (residuals {f_lo:e}, {f_hi:e})")]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("gate specification unsatisfiable: {0}")]
    GateUnsatisfiable(String),

    #[error("polynomial gate degree budget {budget} exhausted for {gate}")]
    GateBudgetExhausted { gate: String, budget: usize },

    #[error("gate {gate} failed certification on constraint `{constraint}` at t = {location:e} (margin {margin:e})")]
    CertificationFailed { gate: String, constraint: String, location: f64, margin: f64 },

    #[error("value {value:e} left the certified domain [{lo}, {hi}] of {gate}")]
    DomainExcursion { gate: String, value: f64, lo: f64, hi: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("modulus of continuity insufficient: {0}")]
    ModulusInsufficient(String),

    #[error("target function inconsistent with its declared data: {0}")]
    TargetInconsistent(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
