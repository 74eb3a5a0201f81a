use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Compute(#[from] nhaas_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Compute(nhaas_core::Error::Parse(_) | nhaas_core::Error::InvalidParams(_)) => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}
