use thiserror::Error;

/// Errors produced while loading inputs or parsing rules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty column")]
    EmptyColumn,

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("column index {index} out of range (row has {width} fields)")]
    ColumnIndex { index: usize, width: usize },

    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("examples must be formatted (observed cell {0} has format 0)")]
    UnformattedExample(usize),

    #[error("observed index {index} out of range for column of {len} cells")]
    ObservedOutOfRange { index: usize, len: usize },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("`{name}` expects {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: String,
        found: usize,
    },

    #[error("invalid predicate: {0}")]
    InvalidPredicate(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("empty rule: the tree has no positive leaf")]
    EmptyRule,

    #[error("task has no gold formatting")]
    MissingGold,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("task generation failed: {0}")]
    Generation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
