use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown basic type `{0}`")]
    UnknownBase(String),
    #[error("invalid adjoint order `{0}`")]
    InvalidOrder(String),
    #[error("word `{0}` is not in the dictionary")]
    DictionaryMiss(String),
    #[error("sentence `{0}` is not grammatical")]
    Ungrammatical(String),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyper(String),
    #[error("word `{word}` already holds {existing} parameter slots, requested {requested}")]
    SlotMismatch {
        word: String,
        existing: usize,
        requested: usize,
    },
    #[error("parameter vector has length {got}, expected {expected}")]
    ParamLength { got: usize, expected: usize },
    #[error("circuit has {0} open qubits; a scalar amplitude requires none")]
    NotScalar(usize),
    #[error("corpus generation exhausted {0} retries without reaching the requested size")]
    RetryBudget(usize),
    #[error("line {line}: {msg}")]
    CorpusFormat { line: usize, msg: String },
    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
