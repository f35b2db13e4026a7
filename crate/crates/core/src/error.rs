use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: label `{label}` not in the fixed alphabet")]
    UnknownLabel { line: usize, label: String },

    #[error("duplicate label `{0}` in alphabet")]
    DuplicateLabel(String),

    #[error("tick {tick} outside 1..={max}")]
    TickOutOfRange { tick: u64, max: u64 },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("episode span {span} exceeds window {window}")]
    SpanExceedsWindow { span: u64, window: u64 },

    #[error("horizon {horizon} precedes last event tick {last}")]
    HorizonBeforeLastEvent { horizon: u64, last: u64 },

    #[error("need horizon T > window W (T={horizon}, W={window})")]
    DegenerateHorizon { horizon: u64, window: u64 },

    #[error("conditional probability {target} unreachable: per-tick ceiling is {ceiling}")]
    InfeasibleWeight { target: f64, ceiling: f64 },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
