use thiserror::Error;

use crate::binder::{BindError, EvalError};
use crate::disambiguation::{AmbiguityError, OverConstrained};
use crate::grammar::GrammarError;
use crate::lexer::LexError;
use crate::model::ValidationReport;
use crate::parser::SyntaxError;
use crate::text::ReadError;

/// Any failure along the pipeline from model text to evaluated graph.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("{0}")]
    Hook(String),
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    OverConstrained(#[from] OverConstrained),
    #[error(transparent)]
    Ambiguity(#[from] AmbiguityError),
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Coarse classification used by exit codes and corpus expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Model,
    Lexical,
    Syntax,
    OverConstrained,
    Conversion,
    Ambiguous,
    Unresolved,
    DuplicateId,
    InvalidData,
    Evaluation,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Read(_) | Error::Invalid(_) | Error::Grammar(_) | Error::Hook(_) => ErrorKind::Model,
            Error::Lex(_) => ErrorKind::Lexical,
            Error::Syntax(_) => ErrorKind::Syntax,
            Error::OverConstrained(_) => ErrorKind::OverConstrained,
            Error::Ambiguity(_) => ErrorKind::Ambiguous,
            Error::Bind(BindError::Conversion { .. }) => ErrorKind::Conversion,
            Error::Bind(BindError::Unresolved { .. } | BindError::AmbiguousReference { .. }) => ErrorKind::Unresolved,
            Error::Bind(BindError::DuplicateId { .. }) => ErrorKind::DuplicateId,
            Error::Bind(BindError::InvalidData(_)) => ErrorKind::InvalidData,
            Error::Eval(_) => ErrorKind::Evaluation,
        }
    }

    /// 2 model, 3 lexical/syntax/conversion, 4 ambiguity, 5 references,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Model => 2,
            ErrorKind::Lexical | ErrorKind::Syntax | ErrorKind::OverConstrained | ErrorKind::Conversion => 3,
            ErrorKind::Ambiguous => 4,
            ErrorKind::Unresolved | ErrorKind::DuplicateId => 5,
            ErrorKind::InvalidData | ErrorKind::Evaluation => 1,
        }
    }
}
