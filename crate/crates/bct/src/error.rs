use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum BctError {
    #[error("alphabet size {0} out of range (must be in 2..=256)")]
    BadAlphabet(usize),

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("context of length {len} exceeds maximum depth {max}")]
    ContextTooLong { len: usize, max: usize },

    #[error("improper tree: {0}")]
    ImproperTree(String),

    #[error("past of length {have} is too short (need {need} symbols)")]
    PastTooShort { have: usize, need: usize },

    #[error("hyperparameter beta={0} outside (0, 1)")]
    BadBeta(f64),

    #[error("probability vector invalid: {0}")]
    BadProbabilities(String),

    #[error("{what} would require {count} items (limit {limit})")]
    Capacity {
        what: &'static str,
        count: u128,
        limit: u128,
    },

    #[error("empty series where data is required")]
    EmptySeries,

    #[error("series of length {have} is too short (need {need})")]
    SeriesTooShort { have: usize, need: usize },

    #[error("block length {k} out of range for series of length {n}")]
    BadBlockLength { k: usize, n: usize },

    #[error("induced chain is not irreducible; stationary distribution is not unique")]
    NotIrreducible,

    #[error("stationary solver failed to converge")]
    SolverFailed,

    #[error("sample {index} produced a non-finite value {value}")]
    NonFiniteSample { index: usize, value: f64 },

    #[error("need at least one sample")]
    NoSamples,

    #[error("unknown fixture `{0}` (expected ternary5, binary3 or bimodal6)")]
    UnknownFixture(String),
}

pub type Result<T> = std::result::Result<T, BctError>;
