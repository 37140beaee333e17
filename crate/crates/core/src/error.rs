use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown symbol `{symbol}` in {alphabet}")]
    UnknownSymbol { symbol: String, alphabet: &'static str },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("cannot parse rational `{0}`")]
    ParseRational(String),

    #[error("instance field `{field}`: {message}")]
    Instance { field: String, message: String },

    /// A configured size bound would be exceeded.
    #[error("size budget exceeded: {what} needs {required}, bound is {bound}")]
    Budget {
        what: &'static str,
        required: u128,
        bound: u128,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    #[error("color set `{0}` has no codeword")]
    UnknownColorSet(String),

    #[error("invalid bitstring: {0}")]
    InvalidBitstring(String),

    #[error("framing error: {0}")]
    Framing(String),

    #[error("side information inconsistent with every member of color class {color} at coordinate {coordinate}")]
    ModelInconsistency { color: usize, coordinate: usize },

    #[error("color class {color} yields conflicting outcomes at coordinate {coordinate}: {first} vs {second}")]
    InvariantViolation {
        color: usize,
        coordinate: usize,
        first: String,
        second: String,
    },

    #[error("integrality gap undefined: {0}")]
    UndefinedGap(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
