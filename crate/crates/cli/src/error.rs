use otsuki_spectra::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Exit code 1.
    #[error("verification failed: {0}")]
    Verification(String),
    /// Exit code 3.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidRotation { p, q, reason } => {
                let range = "p/q outside (1/2, √2/2)";
                let extra = if reason == range { String::new() } else { format!("; {reason}") };
                CliError::Usage(format!("invalid rotation number {p}/{q}: {range}{extra}"))
            }
            Error::Domain { .. } | Error::InsufficientLMax { .. } | Error::Io(_) => CliError::Usage(e.to_string()),
            Error::VerificationFailed(msg) => CliError::Verification(msg),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("I/O: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numerical(format!("serialisation: {e}"))
    }
}
