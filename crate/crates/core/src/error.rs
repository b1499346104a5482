use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("non-canonical label \"{0}\": labels must be empty or end in '1'")]
    NonCanonicalLabel(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("no support label extends prefix \"{0}\"")]
    NoExtension(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 usage/parse, 3 capacity, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::NonCanonicalLabel(_) => 2,
            Error::Capacity(_) | Error::CapExceeded(_) => 3,
            _ => 1,
        }
    }
}
