use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown {kind} `{word}`")]
    UnknownWord { kind: &'static str, word: String },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// Errors raised while validating a task graph.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("cycle through node `{0}`")]
    Cycle(String),
    #[error("node `{node}`: {msg}")]
    Arity { node: String, msg: String },
    #[error("catalog: {0}")]
    Catalog(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("no free location for an object in frame {frame} after {tries} tries")]
    Placement { frame: usize, tries: usize },
    #[error("episode generation gave up after {attempts} attempts")]
    RetryExceeded { attempts: usize },
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("invalid generation config: {0}")]
    Config(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error("an audit needs at least {min} episodes, got {n}")]
    TooFew { min: u64, n: u64 },
    #[error(transparent)]
    Generate(#[from] GenerateError),
}
