use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },

    #[error("symbol `{name}` expects {expected} argument(s), found {found}{}", at(*.offset))]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
        offset: Option<usize>,
    },

    #[error("symbol `{name}` used with arity {first} and arity {second}")]
    ConflictingArity {
        name: String,
        first: usize,
        second: usize,
    },

    #[error("denotation has more than {limit} terms")]
    Overflow { limit: usize },

    #[error("automaton is cyclic (cycle through states {witness:?})")]
    CyclicAutomaton { witness: Vec<String> },

    #[error("signatures are incompatible: {0}")]
    SignatureMismatch(String),

    #[error("invalid normalized VSA: {0}")]
    InvalidNormalized(String),

    #[error("reference to undefined label {label} at byte {offset}")]
    DanglingRef { label: u64, offset: usize },

    #[error("label {label} defined twice (second definition at byte {offset})")]
    DuplicateLabel { label: u64, offset: usize },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("invalid generator config: {0}")]
    InvalidConfig(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),
}

fn at(offset: Option<usize>) -> String {
    match offset {
        Some(o) => format!(" at byte {o}"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
