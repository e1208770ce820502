use std::path::PathBuf;

use crate::ids::{QuestionId, StatementId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("path does not exist: {}", .0.display())]
    MissingPath(PathBuf),

    #[error("{}: {message}", path.display())]
    Structure { path: PathBuf, message: String },

    #[error("{}:{line}: {message}", path.display())]
    Row {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate statement id {id:?} in {first} and {second}")]
    DuplicateStatement {
        id: StatementId,
        first: String,
        second: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("corpus has no indexable documents")]
    EmptyCorpus,

    #[error("question {question}: statement {statement} appears more than once in the ranking")]
    DuplicateRankedId {
        question: QuestionId,
        statement: StatementId,
    },

    #[error("question {question}: rankings differ in their id sets (only in first: {only_first:?}; only in other: {only_other:?})")]
    IdSetMismatch {
        question: QuestionId,
        only_first: Vec<StatementId>,
        only_other: Vec<StatementId>,
    },

    #[error("question {question}: no score for candidates {missing:?}")]
    MissingScores {
        question: QuestionId,
        missing: Vec<StatementId>,
    },

    #[error("no rated statements among the tuning questions")]
    NoRatedStatements,

    #[error("unknown statement id {0} (snapshot mismatch)")]
    UnknownStatement(StatementId),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn row(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Row {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
