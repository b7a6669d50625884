use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected 2 tokens, found {found}")]
    Parse { line: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size mismatch: {what} has {got} entries, graph has {expected} nodes")]
    SizeMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
