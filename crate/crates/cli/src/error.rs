use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, missing or mismatched artifacts, bad input data.
    #[error("{0}")]
    Validation(String),
    /// I/O, subprocess and network failures.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

pub(crate) fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// Artifact errors are validation errors when the file is absent or
/// malformed, runtime errors otherwise.
pub(crate) fn from_artifact(e: vcf_core::artifact::ArtifactError) -> CliError {
    use vcf_core::artifact::ArtifactError;
    match &e {
        ArtifactError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => invalid(e),
        ArtifactError::Io { .. } => runtime(e),
        _ => invalid(e),
    }
}
