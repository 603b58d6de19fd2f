use thiserror::Error;

/// Errors raised across the crate. Validation errors name the offending
/// element so callers can report it without re-parsing anything.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("positions {i}..{j} out of range for word of length {len}")]
    PositionOutOfRange { i: usize, j: usize, len: usize },

    #[error("operation requires an ordered alphabet")]
    UnorderedAlphabet,

    #[error("determinism violation at location `{location}` on event `{event}`: {enabled} enabled edges (valuation {valuation})")]
    DeterminismViolation {
        location: String,
        event: String,
        valuation: String,
        enabled: usize,
    },

    #[error("transition row for state `{state}` sums to {sum}, expected 1")]
    RowSum { state: String, sum: f64 },

    #[error("initial distribution sums to {0}, expected 1")]
    InitialSum(f64),

    #[error("negative probability {prob} on `{element}`")]
    NegativeProbability { element: String, prob: f64 },

    #[error("chain is not strongly connected: state `{0}` is not on a cycle through all states")]
    NotStronglyConnected(String),

    #[error("bad probability literal `{0}`")]
    BadProbability(String),

    #[error("formula parse error at {line}:{col}: {msg}")]
    FormulaParse { line: usize, col: usize, msg: String },

    #[error("formula parse error at {line}:{col}: only strict inequalities (< or >) stabilize in the limit; `{op}` is not supported")]
    NonStrictComparator { line: usize, col: usize, op: String },

    #[error("integer overflow in formula coefficients")]
    CoefficientOverflow,

    #[error("empty word has no frequencies")]
    EmptyWord,

    #[error("distribution invalid: {0}")]
    InvalidDistribution(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed chain spec: {0}")]
    ChainSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
