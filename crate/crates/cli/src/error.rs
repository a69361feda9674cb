use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: line {line}, column '{column}': {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{path}: class label {missing} is absent (labels must cover 0..{classes})")]
    ClassGap {
        path: PathBuf,
        missing: usize,
        classes: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for input and configuration problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<scor::Error> for CliError {
    fn from(e: scor::Error) -> Self {
        use scor::Error::*;
        match e {
            InvalidConfig(_) | InvalidSpec(_) | DimensionMismatch { .. } | TooFewDimensions(_) | NoStarts => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
