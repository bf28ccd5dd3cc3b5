//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by parsing, construction and the set calculus.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CylError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("relation `{name}` has arity {expected}, got {found} arguments")]
    Arity { name: String, expected: usize, found: usize },

    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },

    #[error("element {element} out of range for domain of size {size}")]
    ElementOutOfRange { element: usize, size: usize },

    #[error("variable index {index} out of budget {budget}")]
    IndexOutOfRange { index: usize, budget: usize },

    #[error("fresh-index exhaustion: need a budget of {required}, have {available}")]
    FreshIndexExhaustion { required: usize, available: usize },

    #[error("Δ(u) = {delta:?} is not contained in dom(ρ) = {dom:?}")]
    DomainCoverage { delta: Vec<usize>, dom: Vec<usize> },

    #[error("resource guard: {what} needs {size}, limit is {limit}")]
    Resource { what: String, size: usize, limit: usize },

    #[error("operation requires an OrbitRule basis")]
    NotOrbitRule,

    #[error("space is not T2: {0}")]
    NotT2(String),

    #[error("ρ{{a}} is empty: {0}")]
    EmptyPermutation(String),

    #[error("ρ{{a}} has {0} points, expected exactly one")]
    NotSingleton(usize),

    #[error("pins are not injective")]
    PinsNotInjective,

    #[error("signature mismatch: {0}")]
    Signature(String),

    #[error("point {0} is not a model point")]
    NotModelPoint(usize),

    #[error("seed basis set is empty")]
    SeedEmpty,

    #[error("clause-4 conflict: {0}")]
    ClauseConflict(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("set is not a complete closed set of dimension ∅")]
    NotCompleteClosed,

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CylError>;
