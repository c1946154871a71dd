use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("field `{field}`: {source}")]
    Field {
        field: String,
        #[source]
        source: fdw_core::Error,
    },

    #[error("missing field `{0}`")]
    Missing(&'static str),

    #[error(transparent)]
    Core(#[from] fdw_core::Error),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("case {index}: {source}")]
    Case {
        index: usize,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn field(field: impl Into<String>, source: fdw_core::Error) -> Self {
        CliError::Field {
            field: field.into(),
            source,
        }
    }

    pub fn invalid(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Self::field(field, fdw_core::Error::InvalidInput(msg.into()))
    }

    /// Short class name printed on stderr.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Write { .. } => "io",
            CliError::Case { source, .. } => source.class(),
            _ => "validation",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "numerical" => 3,
            "io" => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
