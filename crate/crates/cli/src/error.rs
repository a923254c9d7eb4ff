//! CLI error taxonomy mapped onto exit codes: 1 for validation and
//! consistency problems, 2 for I/O.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    pub fn io(context: impl std::fmt::Display, source: std::io::Error) -> Self {
        CliError::Io(format!("{context}: {source}"))
    }
}

macro_rules! from_validation {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(err: $ty) -> Self {
                CliError::Validation(err.to_string())
            }
        })*
    };
}

from_validation!(
    trihelix::entropy::EntropyError,
    trihelix::overlap::OverlapError,
    trihelix::aggregate::AggregateError,
    trihelix::systemness::SystemnessError
);

impl From<trihelix::classify::ClassifyError> for CliError {
    fn from(err: trihelix::classify::ClassifyError) -> Self {
        match err {
            trihelix::classify::ClassifyError::Io { .. } => CliError::Io(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
