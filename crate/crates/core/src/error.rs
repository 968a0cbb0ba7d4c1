use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("sort error: {0}")]
    Sort(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("malformed structure: {0}")]
    Structure(String),
    #[error("native connective `{0}` has no bound implementation")]
    NativeUnbound(String),
    #[error("exact value required but native connective `{0}` was evaluated approximately")]
    InexactValue(String),
    #[error("context mismatch: {0}")]
    Context(String),
    #[error("{0}")]
    Check(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
