use thiserror::Error;

/// Crate-wide error type.
///
/// `Config` covers everything wrong with user input (files, JSON, inconsistent
/// parameters); `Singular` is reserved for structural models whose stiffness
/// matrix cannot be factorized. The CLI maps the two onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("catalog error: {0}")]
    Catalog(String),

    #[error("unknown section '{name}'; closest matches: {suggestions}")]
    UnknownSection { name: String, suggestions: String },

    #[error("structure is unstable: zero pivot while factorizing at {dof}")]
    Singular { dof: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn catalog(msg: impl Into<String>) -> Self {
        Error::Catalog(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
