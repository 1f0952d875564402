use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid substitution: {0}")]
    InvalidSubstitution(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("empty word")]
    EmptyWord,

    #[error("illegal seed {left}|{right}: {reason}")]
    IllegalSeed {
        left: String,
        right: String,
        reason: String,
    },

    #[error("index {0} out of range: {1}")]
    IndexOutOfRange(i64, String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("missing weight for symbol `{0}`")]
    MissingWeight(String),

    #[error("window [{first}, {last}] is not centred on the origin")]
    AsymmetricWindow { first: i64, last: i64 },

    #[error("max lag {requested} exceeds available {available}")]
    LagTooLarge { requested: usize, available: usize },

    #[error("series is not real-valued at lag {0}")]
    ComplexSeries(i64),

    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("quadrature grid of {required} points exceeds cap of {cap}")]
    ResolutionCap { required: u64, cap: u64 },

    #[error("linear system is {0}")]
    Singular(&'static str),

    #[error("parse error: {0}")]
    Parse(String),
}
